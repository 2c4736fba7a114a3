#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "gsm/sim.hpp"

namespace gsm {

using json = nlohmann::json;

/// Oracle validation campaign settings (the "oracle" section of a config file).
struct OracleSpec {
    std::size_t instances = 200;
    double snr_db = 10.0;
};

/// One member of a loading-factor family: a label plus its own system dimensions.
struct FamilyMember {
    std::string label;
    SystemConfig system;
};

struct Fig2Spec {
    double target_ber = 1e-4;
    std::vector<FamilyMember> family;
};

/// A parsed config file. `sweep.system` is the base system every family member starts from.
struct RunConfig {
    SweepSpec sweep;
    OracleSpec oracle;
    Fig2Spec fig2;
    json source;  // config after overrides, echoed into result sidecars
};

/// Applies one `dotted.path=value` override. The value is parsed as JSON when possible and
/// kept as a string otherwise. Throws ConfigError for malformed overrides.
void apply_override(json& doc, const std::string& assignment);

/// Validates keys and values, throwing ConfigError that lists every offending key.
RunConfig parse_run_config(const json& doc);

RunConfig load_run_config(const std::string& path, const std::vector<std::string>& overrides);

/// Full echo of a sweep spec, including derived quantities.
json to_json(const SweepSpec& spec);

/// FNV-1a 64 of the compact dump of `doc`, as 16 hex digits.
std::string config_hash(const json& doc);

}  // namespace gsm
