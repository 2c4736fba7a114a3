#pragma once

#include <complex>
#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace gsm {

using cplx = std::complex<double>;
using CVector = Eigen::VectorXcd;
using CMatrix = Eigen::MatrixXcd;
using Bits = std::vector<std::uint8_t>;

/// Raised for invalid dimensions, parameters or malformed input data.
class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Raised when an exhaustive search would exceed its candidate budget.
class GuardBoundError : public std::runtime_error {
public:
    GuardBoundError(const std::string& what, double candidates)
        : std::runtime_error(what), candidates_(candidates) {}

    double candidates() const noexcept { return candidates_; }

private:
    double candidates_;
};

/// Dimensions of a (multiuser) GSM single-carrier link.
///
/// Stacked block vectors are laid out time-major: entry t * slice_dim() + p * n_tx + u
/// holds antenna u of user p at channel use t.
struct SystemConfig {
    std::size_t n = 128;       // block length in channel uses
    std::size_t n_cp = 32;     // cyclic prefix length in samples
    std::size_t n_users = 1;
    std::size_t n_tx = 4;      // transmit antennas per user
    std::size_t n_active = 2;  // active antennas per user
    std::size_t n_rx = 4;
    std::size_t qam_order = 4;

    /// Throws ConfigError naming the first violated constraint.
    void validate() const;

    /// floor(log2(C(n_tx, n_active))).
    std::size_t tac_bits() const;
    std::size_t n_comb() const { return std::size_t{1} << tac_bits(); }
    std::size_t symbol_bits() const;
    std::size_t bits_per_gsm_symbol() const { return tac_bits() + n_active * symbol_bits(); }
    std::size_t slice_dim() const { return n_users * n_tx; }
    std::size_t block_len() const { return n * slice_dim(); }
    std::size_t block_bits() const { return n * n_users * bits_per_gsm_symbol(); }

    bool operator==(const SystemConfig&) const = default;
};

/// Exact binomial coefficient; saturates at SIZE_MAX.
std::size_t binomial(std::size_t n, std::size_t k);

}  // namespace gsm
