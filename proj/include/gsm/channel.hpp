#pragma once

#include <random>
#include <string>
#include <vector>

#include "gsm/types.hpp"

namespace gsm {

using Rng = std::mt19937_64;

struct DelayTap {
    double delay_s;
    double power_db;
};

/// Power-delay profile of a tapped delay line.
struct DelayProfile {
    std::string name;
    std::vector<DelayTap> taps;

    /// Throws ConfigError unless delays are nonnegative, strictly increasing, and nonempty.
    void validate() const;
};

/// Extended Typical Urban profile (3GPP TS 36.104, Annex B.2).
DelayProfile etu_profile();
DelayProfile flat_profile();
/// `taps` equal-power taps at consecutive multiples of `sample_period_s`.
DelayProfile uniform_profile(std::size_t taps, double sample_period_s);

/// CSV rows of `delay_seconds,power_db`; blank lines, '#' comments and a non-numeric header
/// row are skipped.
DelayProfile load_profile_csv(const std::string& path);

/// Resolves "etu", "flat", "uniform-<L>" or a CSV path.
DelayProfile named_profile(const std::string& name, double sample_period_s);

/// Sample-spaced profile: power[i] is the normalized linear power at delay i samples.
/// Zero entries are unoccupied delays between occupied ones.
struct SampledProfile {
    std::vector<double> power;

    std::size_t n_taps() const { return power.size(); }
    std::vector<std::size_t> occupied() const;
};

/// Rounds each delay to the nearest sample, merges taps sharing a sample, and normalizes the
/// total power to one.
SampledProfile sample_profile(const DelayProfile& profile, double sample_period_s);

/// Per-tap MIMO gains: gains[i](r, p * n_tx + u) is the gain of tap i from antenna u of user p
/// to receive antenna r.
struct ChannelRealization {
    std::vector<CMatrix> gains;

    std::size_t n_taps() const { return gains.size(); }
};

/// Per-frequency channel matrices H_k = sum_i gains[i] * exp(-2*pi*j*k*i/n), k = 0..n-1.
struct FrequencyDomainChannel {
    std::vector<CMatrix> bins;

    std::size_t n() const { return bins.size(); }
};

/// Circularly symmetric complex Gaussian sample with E|z|^2 = variance.
cplx complex_gaussian(Rng& rng, double variance);

ChannelRealization draw_realization(const SystemConfig& cfg, const SampledProfile& profile, Rng& rng);

/// Prepends the last n_cp channel-use vectors of a stacked block.
CVector add_cyclic_prefix(const CVector& s, std::size_t n, std::size_t n_cp, std::size_t dim);

/// Linear convolution of the CP-extended block `s_with_cp` (n + n_cp channel uses) with the
/// channel taps, CP removal, and complex Gaussian noise with E|n|^2 = noise_variance per entry.
/// Returns the n * n_rx received samples.
CVector apply_channel(const ChannelRealization& channel, const CVector& s_with_cp, std::size_t n,
                      std::size_t n_cp, double noise_variance, Rng& rng);

FrequencyDomainChannel to_frequency(const ChannelRealization& channel, std::size_t n);

/// Y_k = H_k S_k for every frequency of a stacked frequency-domain block.
CVector apply_frequency(const FrequencyDomainChannel& h, const CVector& s_freq);

/// Noise variance 2*sigma^2 per receive sample giving `snr_db` per receive antenna, for unit
/// energy symbols and a unit-power profile: snr = n_users * n_active / (2*sigma^2).
double noise_variance_for_snr(const SystemConfig& cfg, double snr_db);

}  // namespace gsm
