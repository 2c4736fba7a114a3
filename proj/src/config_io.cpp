#include "gsm/config_io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>

namespace gsm {

namespace {

// Collects every problem in a document before failing.
class Checker {
public:
    void unknown_keys(const json& obj, const std::string& path, const std::set<std::string>& allowed) {
        if (!obj.is_object()) {
            fail(path, "must be an object");
            return;
        }
        for (const auto& [key, value] : obj.items()) {
            if (!allowed.contains(key)) fail(path.empty() ? key : path + "." + key, "unknown key");
        }
    }

    template <typename T>
    void read(const json& obj, const std::string& key, const std::string& path, T& out) {
        if (!obj.is_object() || !obj.contains(key)) return;
        const json& v = obj.at(key);
        const std::string where = path.empty() ? key : path + "." + key;
        try {
            if constexpr (std::is_unsigned_v<T>) {
                if (!v.is_number_integer() || v.get<long long>() < 0) {
                    fail(where, "must be a nonnegative integer");
                    return;
                }
            } else if constexpr (std::is_floating_point_v<T>) {
                if (!v.is_number()) {
                    fail(where, "must be a number");
                    return;
                }
            }
            out = v.get<T>();
        } catch (const json::exception&) {
            fail(where, "has the wrong type");
        }
    }

    void fail(const std::string& key, const std::string& why) { errors_.push_back(key + ": " + why); }

    void throw_if_any() const {
        if (errors_.empty()) return;
        std::string msg = "invalid config:";
        for (const auto& e : errors_) msg += "\n  " + e;
        throw ConfigError(msg);
    }

private:
    std::vector<std::string> errors_;
};

const std::set<std::string> kSystemKeys{"n", "n_cp", "users", "tx", "active", "rx", "qam"};

void read_system(Checker& check, const json& obj, const std::string& path, SystemConfig& sys, bool& has_cp) {
    check.unknown_keys(obj, path, kSystemKeys);
    check.read(obj, "n", path, sys.n);
    check.read(obj, "users", path, sys.n_users);
    check.read(obj, "tx", path, sys.n_tx);
    check.read(obj, "active", path, sys.n_active);
    check.read(obj, "rx", path, sys.n_rx);
    check.read(obj, "qam", path, sys.qam_order);
    if (obj.is_object() && obj.contains("n_cp")) {
        check.read(obj, "n_cp", path, sys.n_cp);
        has_cp = true;
    }
}

std::vector<double> read_penalty(Checker& check, const json& v, const std::string& where) {
    if (v.is_number()) return {v.get<double>()};
    if (v.is_array() && !v.empty()) {
        std::vector<double> out;
        for (const auto& e : v) {
            if (!e.is_number()) {
                check.fail(where, "array entries must be numbers");
                return {60.0};
            }
            out.push_back(e.get<double>());
        }
        return out;
    }
    check.fail(where, "must be a number or a nonempty array of numbers");
    return {60.0};
}

struct Timing {
    double block_duration_s = 67e-6;
    double cp_duration_s = 16.7e-6;
};

void derive_timing(SweepSpec& spec, const Timing& timing, bool has_cp) {
    spec.sample_period_s = timing.block_duration_s / static_cast<double>(spec.system.n);
    if (!has_cp) {
        spec.system.n_cp = static_cast<std::size_t>(std::llround(timing.cp_duration_s / spec.sample_period_s));
    }
}

}  // namespace

void apply_override(json& doc, const std::string& assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string::npos || eq == 0) {
        throw ConfigError("override '" + assignment + "': expected key.path=value");
    }
    const std::string path = assignment.substr(0, eq);
    const std::string text = assignment.substr(eq + 1);
    json value = json::parse(text, nullptr, false);
    if (value.is_discarded()) value = text;

    json* node = &doc;
    std::size_t start = 0;
    while (true) {
        const auto dot = path.find('.', start);
        const std::string key = path.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
        if (key.empty()) throw ConfigError("override '" + assignment + "': empty path component");
        if (!node->is_object()) throw ConfigError("override '" + assignment + "': '" + key + "' is not inside an object");
        if (dot == std::string::npos) {
            (*node)[key] = std::move(value);
            return;
        }
        node = &(*node)[key];
        if (node->is_null()) *node = json::object();
        start = dot + 1;
    }
}

RunConfig parse_run_config(const json& doc) {
    Checker check;
    RunConfig rc;
    rc.source = doc;
    SweepSpec& spec = rc.sweep;

    check.unknown_keys(doc, "", {"label", "system", "channel", "detector", "sweep", "oracle", "fig2"});
    check.read(doc, "label", "", spec.label);

    bool has_cp = false;
    if (doc.contains("system")) read_system(check, doc["system"], "system", spec.system, has_cp);

    Timing timing;
    if (doc.contains("channel")) {
        const json& ch = doc["channel"];
        check.unknown_keys(ch, "channel", {"profile", "block_duration_s", "cp_duration_s"});
        check.read(ch, "profile", "channel", spec.profile);
        check.read(ch, "block_duration_s", "channel", timing.block_duration_s);
        check.read(ch, "cp_duration_s", "channel", timing.cp_duration_s);
        if (!(timing.block_duration_s > 0.0)) check.fail("channel.block_duration_s", "must be positive");
        if (!(timing.cp_duration_s >= 0.0)) check.fail("channel.cp_duration_s", "must be nonnegative");
    }

    if (doc.contains("detector")) {
        const json& d = doc["detector"];
        check.unknown_keys(d, "detector", {"kinds", "q", "restarts", "rho_x", "rho_z"});
        if (d.is_object() && d.contains("kinds")) {
            std::vector<std::string> names;
            check.read(d, "kinds", "detector", names);
            spec.detectors.clear();
            for (const auto& name : names) {
                try {
                    spec.detectors.push_back(parse_detector_kind(name));
                } catch (const ConfigError& e) {
                    check.fail("detector.kinds", "unknown detector '" + name + "'");
                }
            }
        }
        check.read(d, "q", "detector", spec.detector.iterations);
        check.read(d, "restarts", "detector", spec.detector.restarts);
        if (d.is_object() && d.contains("rho_x")) spec.detector.rho_x = read_penalty(check, d["rho_x"], "detector.rho_x");
        if (d.is_object() && d.contains("rho_z")) spec.detector.rho_z = read_penalty(check, d["rho_z"], "detector.rho_z");
    }

    if (doc.contains("sweep")) {
        const json& s = doc["sweep"];
        check.unknown_keys(s, "sweep", {"snr_db", "min_errors", "min_blocks", "max_blocks", "seed", "mld_guard"});
        check.read(s, "snr_db", "sweep", spec.snr_db);
        check.read(s, "min_errors", "sweep", spec.min_errors);
        check.read(s, "min_blocks", "sweep", spec.min_blocks);
        check.read(s, "max_blocks", "sweep", spec.max_blocks);
        check.read(s, "seed", "sweep", spec.seed);
        check.read(s, "mld_guard", "sweep", spec.mld_guard);
    }

    if (doc.contains("oracle")) {
        const json& o = doc["oracle"];
        check.unknown_keys(o, "oracle", {"instances", "snr_db"});
        check.read(o, "instances", "oracle", rc.oracle.instances);
        check.read(o, "snr_db", "oracle", rc.oracle.snr_db);
    }

    std::vector<std::pair<FamilyMember, bool>> members;
    if (doc.contains("fig2")) {
        const json& f = doc["fig2"];
        check.unknown_keys(f, "fig2", {"target_ber", "family"});
        check.read(f, "target_ber", "fig2", rc.fig2.target_ber);
        if (!(rc.fig2.target_ber > 0.0 && rc.fig2.target_ber < 1.0)) check.fail("fig2.target_ber", "must lie in (0, 1)");
        if (f.is_object() && f.contains("family")) {
            const json& fam = f["family"];
            if (!fam.is_array()) check.fail("fig2.family", "must be an array");
            std::set<std::string> labels;
            for (std::size_t i = 0; fam.is_array() && i < fam.size(); ++i) {
                const std::string path = "fig2.family[" + std::to_string(i) + "]";
                const json& m = fam[i];
                check.unknown_keys(m, path, {"label", "system"});
                FamilyMember member{"", spec.system};
                bool member_cp = has_cp;
                check.read(m, "label", path, member.label);
                if (member.label.empty()) check.fail(path + ".label", "required");
                if (!labels.insert(member.label).second) check.fail(path + ".label", "duplicate label '" + member.label + "'");
                if (m.is_object() && m.contains("system")) read_system(check, m["system"], path + ".system", member.system, member_cp);
                members.emplace_back(std::move(member), member_cp);
            }
        }
    }
    check.throw_if_any();

    // oracle-only configs may omit the sweep grid
    if (spec.snr_db.empty() && doc.contains("oracle")) spec.snr_db = {rc.oracle.snr_db};
    derive_timing(spec, timing, has_cp);
    spec.validate();

    for (auto& [member, member_cp] : members) {
        SweepSpec ms = spec;
        ms.system = member.system;
        derive_timing(ms, timing, member_cp);
        try {
            ms.validate();
        } catch (const ConfigError& e) {
            throw ConfigError("fig2 member '" + member.label + "': " + e.what());
        }
        member.system = ms.system;
        rc.fig2.family.push_back(member);
    }
    return rc;
}

RunConfig load_run_config(const std::string& path, const std::vector<std::string>& overrides) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config '" + path + "'");
    json doc = json::parse(in, nullptr, false, true);
    if (doc.is_discarded()) throw ConfigError("config '" + path + "' is not valid JSON");
    for (const auto& o : overrides) apply_override(doc, o);
    return parse_run_config(doc);
}

json to_json(const SweepSpec& spec) {
    json detectors = json::array();
    for (const auto kind : spec.detectors) detectors.push_back(to_string(kind));
    const auto& s = spec.system;
    return {
        {"label", spec.label},
        {"system",
         {{"n", s.n},
          {"n_cp", s.n_cp},
          {"users", s.n_users},
          {"tx", s.n_tx},
          {"active", s.n_active},
          {"rx", s.n_rx},
          {"qam", s.qam_order},
          {"n_comb", s.n_comb()},
          {"bits_per_gsm_symbol", s.bits_per_gsm_symbol()}}},
        {"channel", {{"profile", spec.profile}, {"sample_period_s", spec.sample_period_s}}},
        {"detector",
         {{"kinds", detectors},
          {"q", spec.detector.iterations},
          {"restarts", spec.detector.restarts},
          {"rho_x", spec.detector.rho_x},
          {"rho_z", spec.detector.rho_z}}},
        {"sweep",
         {{"snr_db", spec.snr_db},
          {"min_errors", spec.min_errors},
          {"min_blocks", spec.min_blocks},
          {"max_blocks", spec.max_blocks},
          {"seed", spec.seed},
          {"mld_guard", spec.mld_guard}}},
        {"load", {{"users_per_rx", load_users_per_rx(s)}, {"streams_per_rx", load_streams_per_rx(s)}}},
    };
}

std::string config_hash(const json& doc) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (const unsigned char c : doc.dump()) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

}  // namespace gsm
