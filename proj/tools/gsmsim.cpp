// gsmsim: Monte Carlo BER simulation of GSM single-carrier links.
//
//   gsmsim sweep          --config cfg.json [--out dir] [--override key=value]... [--workers N] [--seed S]
//   gsmsim oracle-compare --config cfg.json [--out dir] ...
//   gsmsim fig2           --config cfg.json [--out dir] ...
//   gsmsim profile-dump   [--config cfg.json | --profile etu --sample-period 5.234e-7]
//
// Exit codes: 0 success, 1 runtime failure, 2 config error, 3 guard-bound refusal.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <thread>

#include <CLI11.hpp>

#include "gsm/baseline.hpp"
#include "gsm/config_io.hpp"

namespace fs = std::filesystem;
using namespace gsm;

namespace {

constexpr int kExitRuntime = 1;
constexpr int kExitConfig = 2;
constexpr int kExitGuard = 3;

struct CommonOptions {
    std::string config;
    std::string out = "results";
    std::vector<std::string> overrides;
    std::size_t workers = std::max(1u, std::thread::hardware_concurrency());
    std::optional<std::uint64_t> seed;
    int verbosity = 0;
};

RunConfig load(const CommonOptions& opt) {
    auto overrides = opt.overrides;
    if (opt.seed) overrides.push_back("sweep.seed=" + std::to_string(*opt.seed));
    return load_run_config(opt.config, overrides);
}

std::string timestamp() {
    const std::time_t now = std::time(nullptr);
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y%m%dT%H%M%SZ", &tm);
    return buf;
}

json metadata(const RunConfig& rc, const CommonOptions& opt, double wall_time_s) {
    return {{"config", rc.source},
            {"config_path", opt.config},
            {"overrides", opt.overrides},
            {"workers", opt.workers},
            {"wall_time_s", wall_time_s},
            {"version", GSMSIM_VERSION},
            {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
                          std::to_string(EIGEN_MINOR_VERSION)},
            {"compiler", __VERSION__}};
}

void write_json(const fs::path& path, const json& doc) {
    std::ofstream f(path);
    f << doc.dump(2) << '\n';
}

fs::path stem_for(const CommonOptions& opt, const json& source, const std::string& label, const std::string& stamp) {
    fs::create_directories(opt.out);
    return fs::path(opt.out) / (label + "_" + config_hash(source) + "_" + stamp);
}

void write_sweep(const SweepResult& result, const fs::path& stem, json meta) {
    json files = json::array();
    for (const auto& curve : result.curves) {
        const fs::path csv = stem.string() + "_" + to_string(curve.kind) + ".csv";
        std::ofstream f(csv);
        write_curve_csv(f, curve);
        files.push_back(csv.filename().string());
    }
    meta["spec"] = to_json(result.spec);
    meta["curves"] = files;
    write_json(stem.string() + ".json", meta);
}

void print_sweep(const SweepResult& result) {
    for (const auto& curve : result.curves) {
        std::printf("%s  [%s]\n", result.spec.label.c_str(), to_string(curve.kind).c_str());
        std::printf("  %8s %8s %12s %10s %12s %10s\n", "snr_db", "blocks", "bits", "errors", "ber", "ci95");
        for (const auto& p : curve.points) {
            std::printf("  %8.2f %8zu %12zu %10zu %12.4e %10.2e\n", p.snr_db, p.blocks, p.bits, p.errors, p.ber, p.ci95);
        }
    }
}

int cmd_sweep(const CommonOptions& opt) {
    const RunConfig rc = load(opt);
    const SweepResult result = run_sweep(rc.sweep, opt.workers);
    const fs::path stem = stem_for(opt, rc.source, rc.sweep.label, timestamp());
    write_sweep(result, stem, metadata(rc, opt, result.wall_time_s));
    print_sweep(result);
    std::printf("wrote %s.json\n", stem.string().c_str());
    return 0;
}

int cmd_oracle_compare(const CommonOptions& opt) {
    const RunConfig rc = load(opt);
    const double candidates = ml_candidate_count(rc.sweep.system);
    if (candidates > rc.sweep.mld_guard) {
        std::fprintf(stderr, "oracle-compare: %.6g candidate blocks per instance exceed the guard bound %.6g\n",
                     candidates, rc.sweep.mld_guard);
        return kExitGuard;
    }
    const auto start = std::chrono::steady_clock::now();
    const SweepContext ctx(rc.sweep);
    const std::size_t count = rc.oracle.instances;
    std::vector<OracleComparison> rows(count);
    std::atomic<std::size_t> cursor{0};
    auto work = [&] {
        for (std::size_t i = cursor++; i < count; i = cursor++) rows[i] = compare_with_oracle(ctx, rc.oracle.snr_db, i);
    };
    {
        std::vector<std::jthread> pool;
        for (std::size_t w = 0; w < std::min(opt.workers, std::max<std::size_t>(count, 1)); ++w) pool.emplace_back(work);
    }

    std::size_t matches = 0, below_ml = 0, ratio_count = 0;
    double ratio_sum = 0.0;
    for (const auto& r : rows) {
        matches += r.match ? 1 : 0;
        below_ml += r.f_admm < r.f_ml ? 1 : 0;
        if (r.f_ml > 0.0) {
            ratio_sum += r.f_admm / r.f_ml;
            ++ratio_count;
        }
    }
    const double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

    const fs::path stem = stem_for(opt, rc.source, rc.sweep.label + "_oracle", timestamp());
    {
        std::ofstream f(stem.string() + ".csv");
        f << "instance,seed,f_admm,f_ml,match\n";
        char line[160];
        for (std::size_t i = 0; i < rows.size(); ++i) {
            std::snprintf(line, sizeof line, "%zu,%llu,%.17g,%.17g,%d\n", i,
                          static_cast<unsigned long long>(rows[i].seed), rows[i].f_admm, rows[i].f_ml,
                          rows[i].match ? 1 : 0);
            f << line;
        }
    }
    const double match_rate = count ? static_cast<double>(matches) / static_cast<double>(count) : 0.0;
    const double mean_ratio = ratio_count ? ratio_sum / static_cast<double>(ratio_count) : 1.0;
    json meta = metadata(rc, opt, elapsed);
    meta["spec"] = to_json(rc.sweep);
    meta["summary"] = {{"instances", count},     {"snr_db", rc.oracle.snr_db}, {"match_rate", match_rate},
                       {"mean_objective_ratio", mean_ratio}, {"admm_below_ml", below_ml}};
    write_json(stem.string() + ".json", meta);

    if (opt.verbosity > 0) {
        for (std::size_t i = 0; i < rows.size(); ++i) {
            std::printf("  instance %4zu seed %20llu f_admm %.6e f_ml %.6e %s\n", i,
                        static_cast<unsigned long long>(rows[i].seed), rows[i].f_admm, rows[i].f_ml,
                        rows[i].match ? "match" : "MISS");
        }
    }
    std::printf("instances            %zu\n", count);
    std::printf("ml match rate        %.4f (%zu/%zu)\n", match_rate, matches, count);
    std::printf("mean f_admm / f_ml   %.6f (over %zu instances with f_ml > 0)\n", mean_ratio, ratio_count);
    std::printf("f_admm < f_ml events %zu\n", below_ml);
    std::printf("per-instance breakdown: %s.csv\n", stem.string().c_str());
    return below_ml == 0 ? 0 : kExitRuntime;
}

int cmd_fig2(const CommonOptions& opt) {
    const RunConfig rc = load(opt);
    if (rc.fig2.family.empty()) throw ConfigError("fig2.family: at least one member is required");
    const std::string stamp = timestamp();
    const fs::path stem = stem_for(opt, rc.source, rc.sweep.label + "_fig2", stamp);

    std::ofstream table(stem.string() + ".csv");
    table << "label,users,tx,active,qam,load_users_per_rx,load_streams_per_rx,required_snr_db\n";
    json members = json::array();
    double total_time = 0.0;
    for (const auto& member : rc.fig2.family) {
        SweepSpec spec = rc.sweep;
        spec.label = member.label;
        spec.system = member.system;
        spec.sample_period_s = rc.sweep.sample_period_s * static_cast<double>(rc.sweep.system.n) /
                               static_cast<double>(member.system.n);
        const SweepResult result = run_sweep(spec, opt.workers);
        total_time += result.wall_time_s;
        write_sweep(result, stem.string() + "_" + member.label, metadata(rc, opt, result.wall_time_s));

        const TargetSnr target = snr_at_target(result.curves.front().points, rc.fig2.target_ber);
        std::string cell;
        switch (target.status) {
            case TargetSnr::Status::Reached: cell = std::to_string(target.snr_db); break;
            case TargetSnr::Status::Unreachable: cell = "unreachable"; break;
            case TargetSnr::Status::BelowGrid: cell = "<=" + std::to_string(target.snr_db); break;
        }
        const auto& s = member.system;
        char line[256];
        std::snprintf(line, sizeof line, "%s,%zu,%zu,%zu,%zu,%.6g,%.6g,%s\n", member.label.c_str(), s.n_users, s.n_tx,
                      s.n_active, s.qam_order, load_users_per_rx(s), load_streams_per_rx(s), cell.c_str());
        table << line;
        std::printf("%s", line);
        members.push_back(to_json(spec));
    }
    json meta = metadata(rc, opt, total_time);
    meta["target_ber"] = rc.fig2.target_ber;
    meta["members"] = members;
    write_json(stem.string() + ".json", meta);
    std::printf("wrote %s.csv\n", stem.string().c_str());
    return 0;
}

int cmd_profile_dump(const CommonOptions& opt, const std::string& profile_name, double sample_period) {
    std::string name = profile_name;
    double period = sample_period;
    if (!opt.config.empty()) {
        const RunConfig rc = load(opt);
        name = rc.sweep.profile;
        period = rc.sweep.sample_period_s;
    }
    const SampledProfile sampled = sample_profile(named_profile(name, period), period);
    std::printf("# profile %s, sample period %.6g s, L = %zu\n", name.c_str(), period, sampled.n_taps());
    std::printf("delay_samples,delay_s,power_linear,power_db\n");
    for (std::size_t i = 0; i < sampled.n_taps(); ++i) {
        const double p = sampled.power[i];
        std::printf("%zu,%.6g,%.6g,%s\n", i, static_cast<double>(i) * period, p,
                    p > 0.0 ? std::to_string(10.0 * std::log10(p)).c_str() : "-inf");
    }
    return 0;
}

void add_common(CLI::App* sub, CommonOptions& opt, bool config_required) {
    auto* c = sub->add_option("--config", opt.config, "JSON config file");
    if (config_required) c->required()->check(CLI::ExistingFile);
    sub->add_option("--out", opt.out, "output directory")->capture_default_str();
    sub->add_option("--override", opt.overrides, "key.path=value, repeatable");
    sub->add_option("--workers", opt.workers, "worker threads")->capture_default_str()->check(CLI::PositiveNumber);
    sub->add_option("--seed", opt.seed, "master seed (overrides sweep.seed)");
    sub->add_flag("-v,--verbose", opt.verbosity, "more output");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"GSM single-carrier link simulator"};
    app.require_subcommand(1);

    CommonOptions opt;
    auto* sweep = app.add_subcommand("sweep", "BER versus SNR for the configured detectors");
    add_common(sweep, opt, true);
    auto* oracle = app.add_subcommand("oracle-compare", "compare ADMM against exhaustive ML on small instances");
    add_common(oracle, opt, true);
    auto* fig2 = app.add_subcommand("fig2", "required SNR at a target BER across a config family");
    add_common(fig2, opt, true);
    auto* dump = app.add_subcommand("profile-dump", "print a sampled power-delay profile");
    add_common(dump, opt, false);
    std::string profile_name = "etu";
    double sample_period = 67e-6 / 128.0;
    dump->add_option("--profile", profile_name, "etu, flat, uniform-<L> or a CSV path")->capture_default_str();
    dump->add_option("--sample-period", sample_period, "seconds")->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitConfig;
    }

    try {
        if (*sweep) return cmd_sweep(opt);
        if (*oracle) return cmd_oracle_compare(opt);
        if (*fig2) return cmd_fig2(opt);
        if (*dump) return cmd_profile_dump(opt, profile_name, sample_period);
    } catch (const GuardBoundError& e) {
        std::fprintf(stderr, "refused: %s (%.6g candidates)\n", e.what(), e.candidates());
        return kExitGuard;
    } catch (const ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return kExitConfig;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitRuntime;
    }
    return kExitRuntime;
}
