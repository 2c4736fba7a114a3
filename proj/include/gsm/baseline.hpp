#pragma once

#include "gsm/channel.hpp"
#include "gsm/mapping.hpp"

namespace gsm {

/// Linear MMSE equalization per frequency followed by per-slice support selection and
/// rounding onto A. `noise_variance` is the per-sample 2*sigma^2; values below 1e-12 are
/// floored there.
CVector mmse_detect(const CVector& y_freq, const FrequencyDomainChannel& h, const GsmCodebook& book,
                    const SystemConfig& cfg, double noise_variance);

struct MlResult {
    CVector s_ml;
    double f_min;
};

/// Number of valid blocks: (n_comb * M^n_active)^(n * n_users), as a double.
double ml_candidate_count(const SystemConfig& cfg);

/// Exhaustive maximum-likelihood search over every valid block. Enumeration runs slice by
/// slice in time-major order, each slice counting TAC index first, then labels of the active
/// antennas; the first minimizer found wins ties. Throws GuardBoundError above `guard`
/// candidates.
MlResult mld_oracle(const CVector& y_freq, const FrequencyDomainChannel& h, const GsmCodebook& book,
                    const SystemConfig& cfg, double guard = 1e6);

}  // namespace gsm
