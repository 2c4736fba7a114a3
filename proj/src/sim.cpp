#include "gsm/sim.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <thread>

#include "gsm/baseline.hpp"
#include "gsm/admm_detector.hpp"
#include "gsm/block_dft.hpp"
#include "gsm/seeding.hpp"

namespace gsm {

namespace {

constexpr std::uint64_t kDetectorStream = 0xde7ec7;
constexpr std::uint64_t kOracleStream = 0x02ac1e;

// Trials evaluated between stopping-rule checks.
constexpr std::size_t kBatch = 8;

}  // namespace

std::string to_string(DetectorKind kind) {
    switch (kind) {
        case DetectorKind::Admm: return "admm";
        case DetectorKind::Mmse: return "mmse";
        case DetectorKind::Mld: return "mld";
    }
    return "unknown";
}

DetectorKind parse_detector_kind(const std::string& name) {
    if (name == "admm") return DetectorKind::Admm;
    if (name == "mmse") return DetectorKind::Mmse;
    if (name == "mld") return DetectorKind::Mld;
    throw ConfigError("detector.kinds: unknown detector '" + name + "'");
}

void SweepSpec::validate() const {
    system.validate();
    detector.validate(system);
    if (!(sample_period_s > 0.0)) throw ConfigError("channel: sample period must be positive");
    if (detectors.empty()) throw ConfigError("detector.kinds: select at least one detector");
    if (snr_db.empty()) throw ConfigError("sweep.snr_db: grid must be nonempty");
    for (std::size_t i = 1; i < snr_db.size(); ++i) {
        if (!(snr_db[i] > snr_db[i - 1])) throw ConfigError("sweep.snr_db: grid must be strictly increasing");
    }
    if (min_errors < 1) throw ConfigError("sweep.min_errors: must be >= 1");
    if (max_blocks < 1) throw ConfigError("sweep.max_blocks: must be >= 1");
    if (min_blocks > max_blocks) throw ConfigError("sweep.min_blocks: must not exceed sweep.max_blocks");
    const auto sampled = sample_profile(named_profile(profile, sample_period_s), sample_period_s);
    if (sampled.n_taps() > system.n_cp + 1) {
        throw ConfigError("system.n_cp: cyclic prefix " + std::to_string(system.n_cp) + " shorter than channel memory " +
                          std::to_string(sampled.n_taps() - 1) + " (requires n_cp >= L - 1)");
    }
    if (system.n_cp > system.n) throw ConfigError("system.n_cp: cyclic prefix longer than the block");
    for (const auto kind : detectors) {
        if (kind == DetectorKind::Mld && ml_candidate_count(system) > mld_guard) {
            throw GuardBoundError("detector.kinds: mld needs " + std::to_string(ml_candidate_count(system)) +
                                      " candidates, above the guard bound",
                                  ml_candidate_count(system));
        }
    }
}

const DetectorCurve& SweepResult::curve(DetectorKind kind) const {
    for (const auto& c : curves) {
        if (c.kind == kind) return c;
    }
    throw ConfigError("sweep result has no curve for detector " + to_string(kind));
}

SweepContext::SweepContext(SweepSpec s)
    : spec(std::move(s)),
      book(build_codebook(spec.system)),
      profile(sample_profile(named_profile(spec.profile, spec.sample_period_s), spec.sample_period_s)) {}

TrialInstance make_instance(const SweepContext& ctx, double snr_db, std::uint64_t seed) {
    const auto& cfg = ctx.spec.system;
    Rng rng(seed);
    TrialInstance inst;
    inst.bits.resize(cfg.block_bits());
    std::bernoulli_distribution coin(0.5);
    for (auto& b : inst.bits) b = coin(rng) ? 1 : 0;
    inst.symbols = map_bits(inst.bits, ctx.book, cfg).symbols;

    const ChannelRealization channel = draw_realization(cfg, ctx.profile, rng);
    inst.noise_variance = noise_variance_for_snr(cfg, snr_db);
    const CVector y = apply_channel(channel, add_cyclic_prefix(inst.symbols, cfg.n, cfg.n_cp, cfg.slice_dim()), cfg.n,
                                    cfg.n_cp, inst.noise_variance, rng);
    inst.y_freq = block_dft(y, cfg.n, cfg.n_rx);
    inst.h = to_frequency(channel, cfg.n);
    return inst;
}

std::vector<TrialCounts> run_trial(const SweepContext& ctx, std::size_t snr_index, std::size_t trial_index,
                                   const std::vector<DetectorKind>& which) {
    const auto& cfg = ctx.spec.system;
    const std::uint64_t child = derive_seed(ctx.spec.seed, {snr_index, trial_index});
    const TrialInstance inst = make_instance(ctx, ctx.spec.snr_db.at(snr_index), child);
    const auto& bits = inst.bits;
    const auto& y_freq = inst.y_freq;
    const auto& h = inst.h;
    const double noise_variance = inst.noise_variance;

    std::vector<TrialCounts> out;
    for (const auto kind : which) {
        CVector s_hat;
        switch (kind) {
            case DetectorKind::Admm: {
                DetectorConfig det = ctx.spec.detector;
                det.seed = derive_seed(child, {kDetectorStream});
                s_hat = detect(y_freq, h, ctx.book, cfg, det).s_hat;
                break;
            }
            case DetectorKind::Mmse:
                s_hat = mmse_detect(y_freq, h, ctx.book, cfg, noise_variance);
                break;
            case DetectorKind::Mld:
                s_hat = mld_oracle(y_freq, h, ctx.book, cfg, ctx.spec.mld_guard).s_ml;
                break;
        }
        const Bits decided = demap_bits(s_hat, ctx.book, cfg);
        TrialCounts counts{bits.size(), 0};
        for (std::size_t i = 0; i < bits.size(); ++i) counts.errors += decided[i] != bits[i] ? 1 : 0;
        out.push_back(counts);
    }
    return out;
}

std::vector<TrialCounts> run_trial(const SweepContext& ctx, std::size_t snr_index, std::size_t trial_index) {
    return run_trial(ctx, snr_index, trial_index, ctx.spec.detectors);
}

OracleComparison compare_with_oracle(const SweepContext& ctx, double snr_db, std::size_t index) {
    const auto& cfg = ctx.spec.system;
    OracleComparison out;
    out.seed = derive_seed(ctx.spec.seed, {kOracleStream, index});
    const TrialInstance inst = make_instance(ctx, snr_db, out.seed);

    DetectorConfig det = ctx.spec.detector;
    det.seed = derive_seed(out.seed, {kDetectorStream});
    const DetectionResult admm = detect(inst.y_freq, inst.h, ctx.book, cfg, det);
    const MlResult ml = mld_oracle(inst.y_freq, inst.h, ctx.book, cfg, ctx.spec.mld_guard);
    out.f_admm = admm.f_best;
    out.f_ml = ml.f_min;
    out.match = admm.s_hat == ml.s_ml;
    return out;
}

PointResult make_point(double snr_db, std::size_t blocks, std::size_t bits, std::size_t errors) {
    PointResult p;
    p.snr_db = snr_db;
    p.blocks = blocks;
    p.bits = bits;
    p.errors = errors;
    if (bits > 0) {
        p.ber = static_cast<double>(errors) / static_cast<double>(bits);
        p.ci95 = 1.96 * std::sqrt(p.ber * (1.0 - p.ber) / static_cast<double>(bits));
    }
    return p;
}

SweepResult run_sweep(const SweepSpec& spec, std::size_t workers) {
    spec.validate();
    const auto start = std::chrono::steady_clock::now();
    const SweepContext ctx(spec);
    const std::size_t n_det = spec.detectors.size();
    workers = std::max<std::size_t>(1, workers);

    SweepResult result;
    result.spec = spec;
    for (const auto kind : spec.detectors) result.curves.push_back({kind, {}});

    for (std::size_t si = 0; si < spec.snr_db.size(); ++si) {
        std::vector<std::size_t> blocks(n_det, 0), bits(n_det, 0), errors(n_det, 0);
        std::vector<bool> done(n_det, false);
        std::size_t next_trial = 0;

        while (true) {
            std::vector<DetectorKind> active;
            std::vector<std::size_t> active_index;
            for (std::size_t d = 0; d < n_det; ++d) {
                if (!done[d]) {
                    active.push_back(spec.detectors[d]);
                    active_index.push_back(d);
                }
            }
            if (active.empty()) break;

            const std::size_t batch = std::min(kBatch * workers, spec.max_blocks - next_trial);
            std::vector<std::vector<TrialCounts>> batch_counts(batch);
            std::atomic<std::size_t> cursor{0};
            auto work = [&] {
                for (std::size_t j = cursor++; j < batch; j = cursor++) {
                    batch_counts[j] = run_trial(ctx, si, next_trial + j, active);
                }
            };
            if (workers == 1) {
                work();
            } else {
                std::vector<std::jthread> pool;
                for (std::size_t w = 0; w < std::min(workers, batch); ++w) pool.emplace_back(work);
            }

            // fold in trial order so the stopping index is independent of scheduling
            for (std::size_t j = 0; j < batch; ++j) {
                for (std::size_t a = 0; a < active.size(); ++a) {
                    const std::size_t d = active_index[a];
                    if (done[d]) continue;
                    ++blocks[d];
                    bits[d] += batch_counts[j][a].bits;
                    errors[d] += batch_counts[j][a].errors;
                    if ((errors[d] >= spec.min_errors && blocks[d] >= spec.min_blocks) || blocks[d] >= spec.max_blocks) {
                        done[d] = true;
                    }
                }
            }
            next_trial += batch;
        }
        for (std::size_t d = 0; d < n_det; ++d) {
            result.curves[d].points.push_back(make_point(spec.snr_db[si], blocks[d], bits[d], errors[d]));
        }
    }
    result.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return result;
}

void write_curve_csv(std::ostream& out, const DetectorCurve& curve) {
    out << "snr_db,blocks,bits,errors,ber,ci95\n";
    char line[256];
    for (const auto& p : curve.points) {
        std::snprintf(line, sizeof line, "%.17g,%zu,%zu,%zu,%.17g,%.17g\n", p.snr_db, p.blocks, p.bits, p.errors,
                      p.ber, p.ci95);
        out << line;
    }
}

TargetSnr snr_at_target(const std::vector<PointResult>& points, double target_ber) {
    auto log_ber = [](const PointResult& p) {
        const double floor = p.bits > 0 ? 0.5 / static_cast<double>(p.bits) : 1e-300;
        return std::log10(p.ber > 0.0 ? p.ber : floor);
    };
    for (std::size_t i = 0; i < points.size(); ++i) {
        if (points[i].ber > target_ber) continue;
        if (i == 0) {
            return {points[0].ber == target_ber ? TargetSnr::Status::Reached : TargetSnr::Status::BelowGrid,
                    points[0].snr_db};
        }
        const auto& lo = points[i - 1];
        const auto& hi = points[i];
        if (hi.ber == target_ber) return {TargetSnr::Status::Reached, hi.snr_db};
        const double l0 = log_ber(lo);
        const double l1 = log_ber(hi);
        const double lt = std::log10(target_ber);
        if (l1 == l0) return {TargetSnr::Status::Reached, hi.snr_db};
        const double frac = (lt - l0) / (l1 - l0);
        return {TargetSnr::Status::Reached, lo.snr_db + frac * (hi.snr_db - lo.snr_db)};
    }
    return {TargetSnr::Status::Unreachable, 0.0};
}

double load_users_per_rx(const SystemConfig& cfg) {
    return static_cast<double>(cfg.n_users) / static_cast<double>(cfg.n_rx);
}

double load_streams_per_rx(const SystemConfig& cfg) {
    return static_cast<double>(cfg.n_users * cfg.n_tx) / static_cast<double>(cfg.n_rx);
}

}  // namespace gsm
