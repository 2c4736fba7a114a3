#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "gsm/admm_detector.hpp"
#include "gsm/channel.hpp"
#include "gsm/mapping.hpp"

namespace gsm {

enum class DetectorKind { Admm, Mmse, Mld };

std::string to_string(DetectorKind kind);
/// Accepts "admm", "mmse" and "mld".
DetectorKind parse_detector_kind(const std::string& name);

/// Everything needed to reproduce one BER curve family.
struct SweepSpec {
    std::string label = "sweep";
    SystemConfig system;
    std::string profile = "etu";
    double sample_period_s = 67e-6 / 128.0;
    std::vector<DetectorKind> detectors{DetectorKind::Admm};
    DetectorConfig detector;
    std::vector<double> snr_db;
    std::size_t min_errors = 100;
    std::size_t min_blocks = 1;
    std::size_t max_blocks = 1000;
    std::uint64_t seed = 1;
    double mld_guard = 1e6;

    void validate() const;
};

struct PointResult {
    double snr_db = 0.0;
    std::size_t blocks = 0;
    std::size_t bits = 0;
    std::size_t errors = 0;
    double ber = 0.0;
    double ci95 = 0.0;  // normal-approximation half width
};

struct DetectorCurve {
    DetectorKind kind;
    std::vector<PointResult> points;
};

struct SweepResult {
    SweepSpec spec;
    std::vector<DetectorCurve> curves;
    double wall_time_s = 0.0;

    const DetectorCurve& curve(DetectorKind kind) const;
};

/// Codebook and sampled profile shared by every trial of a sweep.
struct SweepContext {
    explicit SweepContext(SweepSpec spec);

    SweepSpec spec;
    GsmCodebook book;
    SampledProfile profile;
};

/// One simulated block: transmitted data, channel and the frequency-domain observation.
struct TrialInstance {
    Bits bits;
    CVector symbols;
    FrequencyDomainChannel h;
    CVector y_freq;
    double noise_variance = 0.0;
};

/// Draws bits, channel and noise from `seed` in that order.
TrialInstance make_instance(const SweepContext& ctx, double snr_db, std::uint64_t seed);

struct TrialCounts {
    std::size_t bits = 0;
    std::size_t errors = 0;
};

/// One block at SNR grid index `snr_index`: fresh bits, channel and noise from the child
/// seed of (master seed, snr_index, trial_index), then each detector in `which` on the same
/// received block. Result i belongs to which[i].
std::vector<TrialCounts> run_trial(const SweepContext& ctx, std::size_t snr_index, std::size_t trial_index,
                                   const std::vector<DetectorKind>& which);

/// Convenience overload running every detector of the spec.
std::vector<TrialCounts> run_trial(const SweepContext& ctx, std::size_t snr_index, std::size_t trial_index);

/// Per SNR point and detector, accumulates trials in index order until both min_errors errors
/// and min_blocks blocks are reached, or max_blocks blocks. Results do not depend on `workers`.
SweepResult run_sweep(const SweepSpec& spec, std::size_t workers = 1);

struct OracleComparison {
    std::uint64_t seed = 0;
    double f_admm = 0.0;
    double f_ml = 0.0;
    bool match = false;  // ADMM returned the ML block
};

/// Runs ADMM and the exhaustive oracle on instance `index` of an oracle campaign.
OracleComparison compare_with_oracle(const SweepContext& ctx, double snr_db, std::size_t index);

PointResult make_point(double snr_db, std::size_t blocks, std::size_t bits, std::size_t errors);

/// Writes `snr_db,blocks,bits,errors,ber,ci95` rows with a header line.
void write_curve_csv(std::ostream& out, const DetectorCurve& curve);

struct TargetSnr {
    enum class Status { Reached, Unreachable, BelowGrid };
    Status status = Status::Unreachable;
    double snr_db = 0.0;
};

/// SNR where the curve first reaches `target_ber`, by linear interpolation of log10(BER)
/// between the bracketing grid points. A zero BER is replaced by 0.5 / bits before taking
/// the logarithm. BelowGrid reports the first grid point when it already meets the target.
TargetSnr snr_at_target(const std::vector<PointResult>& points, double target_ber);

/// N_u / N_rx.
double load_users_per_rx(const SystemConfig& cfg);
/// N_u * N_tx / N_rx; exceeds 1 exactly when the system is underdetermined.
double load_streams_per_rx(const SystemConfig& cfg);

}  // namespace gsm
