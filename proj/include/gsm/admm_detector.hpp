#pragma once

#include <cstdint>
#include <iosfwd>
#include <limits>
#include <variant>
#include <vector>

#include "gsm/channel.hpp"
#include "gsm/mapping.hpp"

namespace gsm {

/// Settings of the frequency-domain ADMM detector.
///
/// Penalties hold either one value applied to every coordinate, or one value per coordinate
/// of the stacked frequency-domain block (n * n_users * n_tx entries, time/frequency-major).
struct DetectorConfig {
    std::size_t iterations = 30;
    std::size_t restarts = 5;
    std::vector<double> rho_x{60.0};
    std::vector<double> rho_z{60.0};
    std::uint64_t seed = 1;

    void validate(const SystemConfig& cfg) const;
};

/// Per-coordinate penalties expanded to the block length.
struct Penalties {
    Eigen::VectorXd x;
    Eigen::VectorXd z;
};

Penalties expand_penalties(const DetectorConfig& det, const SystemConfig& cfg);

/// Factorizations of H_k^H H_k + P_x,k + P_z,k, one per frequency, reused across iterations
/// and restarts.
class FrequencySolvers {
public:
    FrequencySolvers(const FrequencyDomainChannel& h, const Penalties& penalties);

    /// Solves the k-th system for one right-hand side.
    CVector solve(std::size_t k, const CVector& rhs) const;
    std::size_t n() const { return n_; }

private:
    using Factor = std::variant<Eigen::LLT<CMatrix>, Eigen::FullPivLU<CMatrix>>;

    std::size_t n_ = 0;
    std::vector<Factor> factors_;
};

FrequencySolvers precompute_solvers(const FrequencyDomainChannel& h, const Penalties& penalties);

/// Inputs shared by every iteration and restart of one detection.
struct AdmmProblem {
    AdmmProblem(const SystemConfig& cfg, const GsmCodebook& book, const FrequencyDomainChannel& h,
                const CVector& y_freq, const Penalties& penalties);

    const SystemConfig& cfg;
    const GsmCodebook& book;
    const FrequencyDomainChannel& h;
    const CVector& y_freq;
    const Penalties& penalties;
    CVector h_herm_y;  // H_k^H Y_k stacked over k
};

/// ADMM iterates. S, X, Z, U, W live in the frequency domain; x and z in the time domain.
struct DetectorState {
    CVector S, x, z, U, W, X, Z;
    double f_best = std::numeric_limits<double>::infinity();
    CVector s_hat;
};

struct StepRecord {
    double f_candidate;
    double f_best;
};

/// ||Y - H (F (x) I) s||^2 evaluated per frequency.
double objective(const FrequencyDomainChannel& h, const CVector& y_freq, const CVector& s_time,
                 const SystemConfig& cfg);

/// Random start: uniform real and imaginary parts inside the constellation's bounding box,
/// projected onto valid supports (x) and onto A with zero (z); duals start at zero.
DetectorState initial_state(const AdmmProblem& problem, Rng& rng);

/// State whose auxiliary iterates are fixed at `s_time` and duals at zero.
DetectorState state_from_block(const AdmmProblem& problem, const CVector& s_time);

/// One iteration: per-frequency solve, support projection, lattice projection, candidate
/// hardening with incumbent update, forward transforms, dual ascent.
StepRecord admm_step(DetectorState& state, const FrequencySolvers& solvers, const AdmmProblem& problem);

struct IterationRecord {
    std::size_t restart;
    std::size_t iteration;
    double f_candidate;
    double f_best;
};

struct DetectionResult {
    CVector s_hat;
    double f_best = std::numeric_limits<double>::infinity();
    std::vector<IterationRecord> diagnostics;
};

/// Multi-restart ADMM detection of one block. Deterministic for a given det.seed.
/// Diagnostics are only collected when `collect_diagnostics` is set.
DetectionResult detect(const CVector& y_freq, const FrequencyDomainChannel& h, const GsmCodebook& book,
                       const SystemConfig& cfg, const DetectorConfig& det, bool collect_diagnostics = false);

/// CSV rows `restart,iteration,f_candidate,f_best` with a header line.
void write_diagnostics_csv(std::ostream& out, const std::vector<IterationRecord>& records);

}  // namespace gsm
