#include <doctest.h>

#include <sstream>

#include "gsm/admm_detector.hpp"
#include "gsm/block_dft.hpp"
#include "gsm/seeding.hpp"
#include "oracles.hpp"

using namespace gsm;

namespace {

SystemConfig make_cfg(std::size_t n, std::size_t n_cp, std::size_t users, std::size_t n_tx, std::size_t n_active,
                      std::size_t n_rx, std::size_t qam = 4) {
    SystemConfig cfg;
    cfg.n = n;
    cfg.n_cp = n_cp;
    cfg.n_users = users;
    cfg.n_tx = n_tx;
    cfg.n_active = n_active;
    cfg.n_rx = n_rx;
    cfg.qam_order = qam;
    return cfg;
}

DetectorConfig det_with(double rho, std::size_t q = 30, std::size_t restarts = 5, std::uint64_t seed = 1) {
    DetectorConfig det;
    det.iterations = q;
    det.restarts = restarts;
    det.rho_x = {rho};
    det.rho_z = {rho};
    det.seed = seed;
    return det;
}

}  // namespace

TEST_CASE("per-frequency solver examples") {
    Rng rng(1);
    SUBCASE("zero penalties give the zero-forcing solution") {
        const CMatrix h = CMatrix::Random(3, 3) + 3.0 * CMatrix::Identity(3, 3);
        const FrequencyDomainChannel fd{{h}};
        const Penalties pen{Eigen::VectorXd::Zero(3), Eigen::VectorXd::Zero(3)};
        const auto solvers = precompute_solvers(fd, pen);
        const CVector y = test::random_cvector(rng, 3);
        const CVector s = solvers.solve(0, h.adjoint() * y);
        CHECK((h * s - y).norm() <= 1e-12 * y.norm());
    }
    SUBCASE("identity channel with unit penalties averages the three terms") {
        const FrequencyDomainChannel fd{{CMatrix::Identity(2, 2)}};
        const Penalties pen{Eigen::VectorXd::Ones(2), Eigen::VectorXd::Ones(2)};
        const auto solvers = precompute_solvers(fd, pen);
        const CVector y = test::random_cvector(rng, 2), xu = test::random_cvector(rng, 2), zw = test::random_cvector(rng, 2);
        const CVector s = solvers.solve(0, y + xu + zw);
        CHECK((s - (y + xu + zw) / 3.0).norm() <= 1e-14);
    }
    SUBCASE("random wide channel satisfies the normal equations") {
        const CMatrix h = CMatrix::Random(2, 6);
        const FrequencyDomainChannel fd{{h, 0.5 * h}};
        Eigen::VectorXd px(12), pz(12);
        for (int i = 0; i < 12; ++i) {
            px[i] = 0.5 + i;
            pz[i] = 2.0;
        }
        const auto solvers = precompute_solvers(fd, {px, pz});
        for (std::size_t k = 0; k < 2; ++k) {
            const CVector rhs = test::random_cvector(rng, 6);
            const CVector s = solvers.solve(k, rhs);
            const CMatrix a = fd.bins[k].adjoint() * fd.bins[k] +
                              CMatrix((px.segment(6 * k, 6) + pz.segment(6 * k, 6)).cast<cplx>().asDiagonal());
            CHECK((a * s - rhs).norm() <= 1e-12 * rhs.norm());
        }
    }
    SUBCASE("singular systems are reported") {
        const FrequencyDomainChannel fd{{CMatrix::Zero(2, 2)}};
        const Penalties pen{Eigen::VectorXd::Zero(2), Eigen::VectorXd::Zero(2)};
        CHECK_THROWS_AS(precompute_solvers(fd, pen), ConfigError);
    }
}

TEST_CASE("detector config validation") {
    const auto cfg = make_cfg(4, 1, 1, 2, 1, 2);
    DetectorConfig det;
    CHECK_NOTHROW(det.validate(cfg));
    det.rho_x = std::vector<double>(cfg.block_len(), 1.0);
    CHECK_NOTHROW(det.validate(cfg));
    CHECK(expand_penalties(det, cfg).x.size() == static_cast<Eigen::Index>(cfg.block_len()));
    det.rho_x = {1.0, 2.0};
    CHECK_THROWS_AS(det.validate(cfg), ConfigError);
    det.rho_x = {0.0};
    det.rho_z = {0.0};
    CHECK_THROWS_AS(det.validate(cfg), ConfigError);
    det.rho_x = {-1.0};
    CHECK_THROWS_AS(det.validate(cfg), ConfigError);
    det = DetectorConfig{};
    det.iterations = 0;
    CHECK_THROWS_AS(det.validate(cfg), ConfigError);
}

TEST_CASE("objective matches the time-domain residual") {
    Rng rng(12);
    const auto cfg = make_cfg(8, 2, 2, 3, 2, 3);
    for (int trial = 0; trial < 10; ++trial) {
        const auto inst = test::make_test_instance(cfg, 3, 0.3, rng);
        const CVector guess = map_bits(test::random_bits(rng, cfg.block_bits()), inst.book, cfg).symbols;
        const double f_time = test::time_domain_objective(inst.ch, inst.y_time, guess, cfg.n);
        CHECK(objective(inst.h, inst.y_freq, guess, cfg) == doctest::Approx(f_time).epsilon(1e-10));
    }
}

TEST_CASE("ADMM step invariants") {
    Rng rng(77);
    const auto cfg = make_cfg(8, 2, 2, 4, 2, 4);
    const auto det = det_with(2.0);
    const Penalties pen = expand_penalties(det, cfg);
    const std::size_t dim = cfg.slice_dim();
    for (int trial = 0; trial < 10; ++trial) {
        const auto inst = test::make_test_instance(cfg, 3, 0.1, rng);
        const AdmmProblem problem(cfg, inst.book, inst.h, inst.y_freq, pen);
        const auto solvers = precompute_solvers(inst.h, pen);
        Rng init(trial);
        DetectorState state = initial_state(problem, init);
        double last_best = std::numeric_limits<double>::infinity();
        double min_candidate = last_best;
        for (int it = 0; it < 15; ++it) {
            const DetectorState before = state;
            const StepRecord rec = admm_step(state, solvers, problem);

            // S solves the normal equations built from the previous iterates
            for (std::size_t k = 0; k < cfg.n; ++k) {
                const auto seg = [&](const CVector& v) { return v.segment(static_cast<Eigen::Index>(k * dim), static_cast<Eigen::Index>(dim)); };
                const Eigen::VectorXd px = pen.x.segment(static_cast<Eigen::Index>(k * dim), static_cast<Eigen::Index>(dim));
                const Eigen::VectorXd pz = pen.z.segment(static_cast<Eigen::Index>(k * dim), static_cast<Eigen::Index>(dim));
                const CMatrix& hk = inst.h.bins[k];
                const CVector lhs = hk.adjoint() * (hk * seg(state.S)) + (px + pz).cast<cplx>().cwiseProduct(seg(state.S));
                const CVector rhs = hk.adjoint() * inst.y_freq.segment(static_cast<Eigen::Index>(k * cfg.n_rx), static_cast<Eigen::Index>(cfg.n_rx)) +
                                    px.cast<cplx>().cwiseProduct(seg(before.X) - seg(before.U)) +
                                    pz.cast<cplx>().cwiseProduct(seg(before.Z) - seg(before.W));
                REQUIRE((lhs - rhs).norm() <= 1e-8);
            }

            // auxiliary iterates live in their sets and the transforms are consistent
            CVector x_proj = project_support_block(state.x, inst.book, cfg);
            CHECK(x_proj == state.x);
            CHECK(project_lattice_block(state.z, inst.book.constellation_with_zero()) == state.z);
            CHECK((state.X - test::naive_block_dft(state.x, cfg.n, dim)).norm() <= 1e-10 * (1.0 + state.x.norm()));
            CHECK((state.Z - test::naive_block_dft(state.z, cfg.n, dim)).norm() <= 1e-10 * (1.0 + state.z.norm()));
            CHECK((state.U - (before.U + state.S - state.X)).norm() <= 1e-12 * (1.0 + state.U.norm()));
            CHECK((state.W - (before.W + state.S - state.Z)).norm() <= 1e-12 * (1.0 + state.W.norm()));

            // incumbent is the best valid candidate so far
            min_candidate = std::min(min_candidate, rec.f_candidate);
            CHECK(rec.f_best <= last_best);
            CHECK(rec.f_best == min_candidate);
            CHECK(is_valid_block(state.s_hat, inst.book, cfg));
            CHECK(objective(inst.h, inst.y_freq, state.s_hat, cfg) == doctest::Approx(state.f_best).epsilon(1e-12));
            last_best = rec.f_best;
        }
    }
}

TEST_CASE("the transmitted block is a fixed point without noise") {
    Rng rng(5);
    const auto cfg = make_cfg(16, 3, 2, 4, 2, 4);
    const auto inst = test::make_test_instance(cfg, 4, 0.0, rng);
    const Penalties pen = expand_penalties(det_with(3.0), cfg);
    const AdmmProblem problem(cfg, inst.book, inst.h, inst.y_freq, pen);
    const auto solvers = precompute_solvers(inst.h, pen);
    DetectorState state = state_from_block(problem, inst.s);
    for (int it = 0; it < 3; ++it) {
        const StepRecord rec = admm_step(state, solvers, problem);
        CHECK(rec.f_candidate <= 1e-20);
        CHECK((state.x - inst.s).norm() <= 1e-10);
        CHECK(state.z == inst.s);
    }
    CHECK(state.s_hat == inst.s);
}

TEST_CASE("scalar flat channel is recovered exactly") {
    Rng rng(9);
    const auto cfg = make_cfg(4, 0, 1, 1, 1, 1, 16);
    const auto inst = test::make_test_instance(cfg, 1, 0.0, rng);
    const auto res = detect(inst.y_freq, inst.h, inst.book, cfg, det_with(1.0));
    CHECK(demap_bits(res.s_hat, inst.book, cfg) == inst.bits);
    CHECK(res.f_best <= 1e-20);
}

TEST_CASE("detect is deterministic and records diagnostics") {
    Rng rng(21);
    const auto cfg = make_cfg(8, 2, 2, 4, 2, 4);
    const auto inst = test::make_test_instance(cfg, 3, 0.5, rng);
    const auto det = det_with(3.0, 10, 3, 1234);
    const auto a = detect(inst.y_freq, inst.h, inst.book, cfg, det, true);
    const auto b = detect(inst.y_freq, inst.h, inst.book, cfg, det, true);
    CHECK(a.s_hat == b.s_hat);
    CHECK(a.f_best == b.f_best);
    REQUIRE(a.diagnostics.size() == 30);
    CHECK(a.diagnostics.back().restart == 2);
    CHECK(a.diagnostics.back().iteration == 9);
    CHECK(a.diagnostics.back().f_best == a.f_best);
    CHECK(detect(inst.y_freq, inst.h, inst.book, cfg, det).diagnostics.empty());

    std::ostringstream csv;
    write_diagnostics_csv(csv, a.diagnostics);
    const std::string text = csv.str();
    CHECK(text.rfind("restart,iteration,f_candidate,f_best\n", 0) == 0);
    CHECK(std::count(text.begin(), text.end(), '\n') == 31);

    auto wrong = cfg;
    wrong.n_rx = 5;
    CHECK_THROWS_AS(detect(inst.y_freq, inst.h, inst.book, wrong, det), ConfigError);
}

TEST_CASE("ADMM never beats the exhaustive optimum on tiny instances") {
    Rng rng(314);
    const auto cfg = make_cfg(2, 1, 1, 2, 1, 84);
    std::size_t matches = 0;
    const std::size_t trials = 60;
    const double noise = noise_variance_for_snr(cfg, 10.0);
    for (std::size_t t = 0; t < trials; ++t) {
        const auto inst = test::make_test_instance(cfg, 2, noise, rng);
        const auto [s_ml, f_ml] = test::brute_ml(inst);
        const auto res = detect(inst.y_freq, inst.h, inst.book, cfg, det_with(60.0, 30, 5, derive_seed(9, {t})));
        CHECK(res.f_best >= f_ml * (1.0 - 1e-12));
        if (res.s_hat == s_ml) ++matches;
    }
    CHECK(matches >= trials * 85 / 100);
}
