#include "gsm/admm_detector.hpp"

#include <cmath>
#include <ostream>

#include "gsm/block_dft.hpp"
#include "gsm/seeding.hpp"

namespace gsm {

namespace {

Eigen::VectorXd expand(const std::vector<double>& rho, std::size_t len, const char* name) {
    if (rho.size() == 1) return Eigen::VectorXd::Constant(static_cast<Eigen::Index>(len), rho[0]);
    if (rho.size() != len) {
        throw ConfigError(std::string("detector.") + name + ": expected 1 or " + std::to_string(len) +
                          " values, got " + std::to_string(rho.size()));
    }
    return Eigen::Map<const Eigen::VectorXd>(rho.data(), static_cast<Eigen::Index>(len));
}

}  // namespace

void DetectorConfig::validate(const SystemConfig& cfg) const {
    if (iterations < 1) throw ConfigError("detector.q: need at least one iteration");
    if (restarts < 1) throw ConfigError("detector.restarts: need at least one restart");
    const auto p = expand_penalties(*this, cfg);
    for (Eigen::Index i = 0; i < p.x.size(); ++i) {
        if (!(p.x[i] >= 0.0) || !(p.z[i] >= 0.0) || !std::isfinite(p.x[i]) || !std::isfinite(p.z[i])) {
            throw ConfigError("detector.rho_x/rho_z: penalties must be finite and >= 0");
        }
        if (p.x[i] + p.z[i] == 0.0) {
            throw ConfigError("detector.rho_x/rho_z: coordinate " + std::to_string(i) + " has both penalties zero");
        }
    }
}

Penalties expand_penalties(const DetectorConfig& det, const SystemConfig& cfg) {
    return {expand(det.rho_x, cfg.block_len(), "rho_x"), expand(det.rho_z, cfg.block_len(), "rho_z")};
}

FrequencySolvers::FrequencySolvers(const FrequencyDomainChannel& h, const Penalties& penalties) : n_(h.n()) {
    const auto dim = h.bins.at(0).cols();
    if (penalties.x.size() != static_cast<Eigen::Index>(n_) * dim || penalties.z.size() != penalties.x.size()) {
        throw ConfigError("precompute_solvers: penalty length does not match the block");
    }
    factors_.reserve(n_);
    for (std::size_t k = 0; k < n_; ++k) {
        const auto offset = static_cast<Eigen::Index>(k) * dim;
        const Eigen::VectorXd diag = penalties.x.segment(offset, dim) + penalties.z.segment(offset, dim);
        CMatrix a = h.bins[k].adjoint() * h.bins[k];
        a.diagonal() += diag.cast<cplx>();
        if (diag.minCoeff() > 0.0) {
            factors_.emplace_back(Eigen::LLT<CMatrix>(a));
            continue;
        }
        Eigen::FullPivLU<CMatrix> lu(a);
        if (!lu.isInvertible()) {
            throw ConfigError("precompute_solvers: system at frequency " + std::to_string(k) +
                              " is singular (zero penalties on a rank-deficient channel)");
        }
        factors_.emplace_back(std::move(lu));
    }
}

CVector FrequencySolvers::solve(std::size_t k, const CVector& rhs) const {
    return std::visit([&](const auto& f) -> CVector { return f.solve(rhs); }, factors_[k]);
}

FrequencySolvers precompute_solvers(const FrequencyDomainChannel& h, const Penalties& penalties) {
    return FrequencySolvers(h, penalties);
}

AdmmProblem::AdmmProblem(const SystemConfig& cfg_, const GsmCodebook& book_, const FrequencyDomainChannel& h_,
                         const CVector& y_freq_, const Penalties& penalties_)
    : cfg(cfg_), book(book_), h(h_), y_freq(y_freq_), penalties(penalties_) {
    const auto rows = static_cast<Eigen::Index>(cfg.n_rx);
    const auto dim = static_cast<Eigen::Index>(cfg.slice_dim());
    if (h.n() != cfg.n || h.bins[0].rows() != rows || h.bins[0].cols() != dim) {
        throw ConfigError("detector: channel dimensions do not match the system config");
    }
    if (y_freq.size() != static_cast<Eigen::Index>(cfg.n) * rows) {
        throw ConfigError("detector: received block length does not match n * n_rx");
    }
    h_herm_y.resize(static_cast<Eigen::Index>(cfg.n) * dim);
    for (std::size_t k = 0; k < cfg.n; ++k) {
        const auto ki = static_cast<Eigen::Index>(k);
        h_herm_y.segment(ki * dim, dim).noalias() = h.bins[k].adjoint() * y_freq.segment(ki * rows, rows);
    }
}

double objective(const FrequencyDomainChannel& h, const CVector& y_freq, const CVector& s_time,
                 const SystemConfig& cfg) {
    const CVector s_freq = block_dft(s_time, cfg.n, cfg.slice_dim());
    return (y_freq - apply_frequency(h, s_freq)).squaredNorm();
}

DetectorState state_from_block(const AdmmProblem& problem, const CVector& s_time) {
    const auto& cfg = problem.cfg;
    const auto len = static_cast<Eigen::Index>(cfg.block_len());
    DetectorState st;
    st.x = s_time;
    st.z = s_time;
    st.X = block_dft(st.x, cfg.n, cfg.slice_dim());
    st.Z = st.X;
    st.S = st.X;
    st.U = CVector::Zero(len);
    st.W = CVector::Zero(len);
    return st;
}

DetectorState initial_state(const AdmmProblem& problem, Rng& rng) {
    const auto& cfg = problem.cfg;
    const double c = problem.book.max_coordinate();
    std::uniform_real_distribution<double> uniform(-c, c);
    CVector s0(static_cast<Eigen::Index>(cfg.block_len()));
    for (Eigen::Index i = 0; i < s0.size(); ++i) {
        const double re = uniform(rng);
        const double im = uniform(rng);
        s0[i] = {re, im};
    }
    DetectorState st;
    st.x = project_support_block(s0, problem.book, cfg);
    st.z = project_lattice_block(s0, problem.book.constellation_with_zero());
    st.X = block_dft(st.x, cfg.n, cfg.slice_dim());
    st.Z = block_dft(st.z, cfg.n, cfg.slice_dim());
    st.S = CVector::Zero(s0.size());
    st.U = CVector::Zero(s0.size());
    st.W = CVector::Zero(s0.size());
    return st;
}

StepRecord admm_step(DetectorState& st, const FrequencySolvers& solvers, const AdmmProblem& problem) {
    const auto& cfg = problem.cfg;
    const auto& book = problem.book;
    const std::size_t n = cfg.n;
    const std::size_t dim = cfg.slice_dim();
    const auto d = static_cast<Eigen::Index>(dim);

    // per-frequency minimization of the augmented Lagrangian over S
    const CVector rhs = problem.h_herm_y + problem.penalties.x.cwiseProduct(st.X - st.U) +
                        problem.penalties.z.cwiseProduct(st.Z - st.W);
    for (std::size_t k = 0; k < n; ++k) {
        const auto off = static_cast<Eigen::Index>(k) * d;
        st.S.segment(off, d) = solvers.solve(k, rhs.segment(off, d));
    }

    // support projection per (channel use, user)
    std::vector<std::size_t> chosen;
    st.x = project_support_block(block_idft(st.S + st.U, n, dim), book, cfg, &chosen);

    // componentwise rounding onto A with zero
    st.z = project_lattice_block(block_idft(st.S + st.W, n, dim), book.constellation_with_zero());

    // harden the time-domain S iterate on the support picked for x
    const CVector s_time = block_idft(st.S, n, dim);
    CVector candidate = CVector::Zero(s_time.size());
    const auto points = book.constellation();
    for (std::size_t t = 0; t < n; ++t) {
        for (std::size_t p = 0; p < cfg.n_users; ++p) {
            const std::size_t base = t * dim + p * cfg.n_tx;
            for (const std::size_t a : book.tacs()[chosen[t * cfg.n_users + p]]) {
                const auto i = static_cast<Eigen::Index>(base + a);
                candidate[i] = points[nearest_index(s_time[i], points)];
            }
        }
    }
    const double f_candidate = objective(problem.h, problem.y_freq, candidate, cfg);
    if (f_candidate < st.f_best) {
        st.f_best = f_candidate;
        st.s_hat = std::move(candidate);
    }

    st.X = block_dft(st.x, n, dim);
    st.Z = block_dft(st.z, n, dim);
    st.U += st.S - st.X;
    st.W += st.S - st.Z;
    return {f_candidate, st.f_best};
}

DetectionResult detect(const CVector& y_freq, const FrequencyDomainChannel& h, const GsmCodebook& book,
                       const SystemConfig& cfg, const DetectorConfig& det, bool collect_diagnostics) {
    det.validate(cfg);
    const Penalties penalties = expand_penalties(det, cfg);
    const AdmmProblem problem(cfg, book, h, y_freq, penalties);
    const FrequencySolvers solvers(h, penalties);

    DetectionResult result;
    for (std::size_t r = 0; r < det.restarts; ++r) {
        Rng rng(derive_seed(det.seed, {r}));
        DetectorState st = initial_state(problem, rng);
        for (std::size_t q = 0; q < det.iterations; ++q) {
            const StepRecord rec = admm_step(st, solvers, problem);
            if (collect_diagnostics) {
                result.diagnostics.push_back({r, q, rec.f_candidate, std::min(rec.f_best, result.f_best)});
            }
        }
        if (st.f_best < result.f_best) {
            result.f_best = st.f_best;
            result.s_hat = std::move(st.s_hat);
        }
    }
    return result;
}

void write_diagnostics_csv(std::ostream& out, const std::vector<IterationRecord>& records) {
    out << "restart,iteration,f_candidate,f_best\n";
    const auto old_precision = out.precision(17);
    for (const auto& r : records) {
        out << r.restart << ',' << r.iteration << ',' << r.f_candidate << ',' << r.f_best << '\n';
    }
    out.precision(old_precision);
}

}  // namespace gsm
