#include <doctest.h>

#include "gsm/config_io.hpp"

using namespace gsm;

namespace {

json base_doc() {
    return json::parse(R"({
      "label": "t",
      "system": {"n": 16, "users": 1, "tx": 4, "active": 2, "rx": 4, "qam": 4},
      "channel": {"profile": "etu"},
      "detector": {"kinds": ["admm", "mmse"], "q": 20, "restarts": 3, "rho_x": 1, "rho_z": [2]},
      "sweep": {"snr_db": [0, 5], "min_errors": 10, "max_blocks": 20, "seed": 4}
    })");
}

std::string error_of(const json& doc) {
    try {
        parse_run_config(doc);
    } catch (const ConfigError& e) {
        return e.what();
    }
    return "";
}

}  // namespace

TEST_CASE("a valid document parses with derived timing") {
    const auto rc = parse_run_config(base_doc());
    const auto& spec = rc.sweep;
    CHECK(spec.label == "t");
    CHECK(spec.system.n_tx == 4);
    CHECK(spec.detectors == std::vector<DetectorKind>{DetectorKind::Admm, DetectorKind::Mmse});
    CHECK(spec.detector.iterations == 20);
    CHECK(spec.detector.rho_z == std::vector<double>{2.0});
    CHECK(spec.sample_period_s == doctest::Approx(67e-6 / 16.0));
    // 16.7 us of prefix at 67 us / 16 rounds to 4 samples
    CHECK(spec.system.n_cp == 4);
    CHECK(spec.min_blocks == 1);
}

TEST_CASE("default timing gives 32 prefix samples at n = 128") {
    auto doc = base_doc();
    doc["system"]["n"] = 128;
    CHECK(parse_run_config(doc).sweep.system.n_cp == 32);
}

TEST_CASE("schema errors name the offending key") {
    SUBCASE("active exceeds tx") {
        auto doc = base_doc();
        doc["system"]["active"] = 5;
        const auto msg = error_of(doc);
        CHECK(msg.find("system.active") != std::string::npos);
        CHECK(msg.find("N_a <= N_tx") != std::string::npos);
    }
    SUBCASE("unknown keys are rejected") {
        auto doc = base_doc();
        doc["sweep"]["max_block"] = 3;
        doc["extra"] = 1;
        const auto msg = error_of(doc);
        CHECK(msg.find("sweep.max_block: unknown key") != std::string::npos);
        CHECK(msg.find("extra: unknown key") != std::string::npos);
    }
    SUBCASE("wrong types") {
        auto doc = base_doc();
        doc["system"]["n"] = "sixteen";
        doc["detector"]["rho_x"] = "big";
        const auto msg = error_of(doc);
        CHECK(msg.find("system.n") != std::string::npos);
        CHECK(msg.find("detector.rho_x") != std::string::npos);
    }
    SUBCASE("unknown detector") {
        auto doc = base_doc();
        doc["detector"]["kinds"] = {"zf"};
        CHECK(error_of(doc).find("unknown detector 'zf'") != std::string::npos);
    }
    SUBCASE("prefix too short for the profile") {
        auto doc = base_doc();
        doc["system"]["n_cp"] = 0;
        CHECK(error_of(doc).find("system.n_cp") != std::string::npos);
    }
    SUBCASE("duplicate family labels") {
        auto doc = base_doc();
        doc["fig2"] = json::parse(R"({"family": [{"label": "a"}, {"label": "a"}]})");
        CHECK(error_of(doc).find("duplicate label 'a'") != std::string::npos);
    }
}

TEST_CASE("oversized exhaustive search is refused at parse time") {
    auto doc = base_doc();
    doc["detector"]["kinds"] = {"mld"};
    CHECK_THROWS_AS(parse_run_config(doc), GuardBoundError);
}

TEST_CASE("overrides edit nested keys") {
    auto doc = base_doc();
    apply_override(doc, "detector.q=7");
    apply_override(doc, "label=renamed");
    apply_override(doc, "sweep.snr_db=[1,2,3]");
    apply_override(doc, "oracle.instances=5");
    const auto rc = parse_run_config(doc);
    CHECK(rc.sweep.detector.iterations == 7);
    CHECK(rc.sweep.label == "renamed");
    CHECK(rc.sweep.snr_db == std::vector<double>{1, 2, 3});
    CHECK(rc.oracle.instances == 5);
    CHECK_THROWS_AS(apply_override(doc, "novalue"), ConfigError);
    CHECK_THROWS_AS(apply_override(doc, "label.x=1"), ConfigError);
}

TEST_CASE("family members inherit and override the base system") {
    auto doc = base_doc();
    doc["fig2"] = json::parse(R"({"target_ber": 0.01, "family": [
        {"label": "gsm", "system": {"users": 2}},
        {"label": "conv", "system": {"tx": 1, "active": 1, "qam": 16}},
        {"label": "wide", "system": {"n": 64}}]})");
    const auto rc = parse_run_config(doc);
    REQUIRE(rc.fig2.family.size() == 3);
    CHECK(rc.fig2.family[0].system.n_users == 2);
    CHECK(rc.fig2.family[0].system.n_tx == 4);
    CHECK(rc.fig2.family[1].system.n_tx == 1);
    CHECK(rc.fig2.family[1].system.qam_order == 16);
    CHECK(rc.fig2.family[2].system.n_cp == 16);
    CHECK(rc.fig2.target_ber == 0.01);

    doc["fig2"]["family"][1]["system"]["active"] = 2;
    CHECK(error_of(doc).find("fig2 member 'conv'") != std::string::npos);
}

TEST_CASE("oracle-only documents default the grid") {
    auto doc = base_doc();
    doc["sweep"].erase("snr_db");
    doc["oracle"] = {{"instances", 3}, {"snr_db", 12.5}};
    CHECK(parse_run_config(doc).sweep.snr_db == std::vector<double>{12.5});
}

TEST_CASE("config echo and hash") {
    const auto rc = parse_run_config(base_doc());
    const json echo = to_json(rc.sweep);
    CHECK(echo["system"]["n_comb"] == 4);
    CHECK(echo["system"]["bits_per_gsm_symbol"] == 6);
    CHECK(echo["detector"]["kinds"] == json({"admm", "mmse"}));
    CHECK(echo["load"]["streams_per_rx"] == 1.0);
    const auto h = config_hash(base_doc());
    CHECK(h.size() == 16);
    CHECK(h == config_hash(base_doc()));
    auto other = base_doc();
    other["sweep"]["seed"] = 5;
    CHECK(h != config_hash(other));
}
