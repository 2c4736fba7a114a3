#pragma once

#include <span>
#include <vector>

#include "gsm/types.hpp"

namespace gsm {

using Tac = std::vector<std::size_t>;

/// Transmit antenna combinations plus the square Gray-mapped QAM alphabet of one GSM scheme.
///
/// constellation()[label] is the point carrying the log2(M)-bit label `label` (MSB first).
/// The alphabet with zero appends 0 after the M points.
class GsmCodebook {
public:
    GsmCodebook(std::size_t n_tx, std::size_t n_active, std::size_t qam_order);

    const std::vector<Tac>& tacs() const { return tacs_; }
    std::span<const cplx> constellation() const { return points_; }
    std::span<const cplx> constellation_with_zero() const { return points_with_zero_; }
    std::size_t tac_bits() const { return tac_bits_; }
    std::size_t symbol_bits() const { return symbol_bits_; }
    std::size_t n_tx() const { return n_tx_; }
    std::size_t n_active() const { return n_active_; }
    std::size_t qam_order() const { return points_.size(); }

    /// Largest |Re| (equivalently |Im|) over the constellation.
    double max_coordinate() const { return max_coordinate_; }

    /// Index of `tac` in tacs(), or tacs().size() if absent.
    std::size_t find_tac(std::span<const std::size_t> tac) const;

    /// Label of the constellation point equal to `value` within `tol`, or qam_order() if none.
    std::size_t find_point(cplx value, double tol = 1e-9) const;

private:
    std::size_t n_tx_;
    std::size_t n_active_;
    std::size_t tac_bits_;
    std::size_t symbol_bits_;
    double max_coordinate_ = 0.0;
    std::vector<Tac> tacs_;
    std::vector<cplx> points_;
    std::vector<cplx> points_with_zero_;
};

/// Information bits and the stacked transmit vector of one block.
struct GsmBlock {
    Bits bits;
    CVector symbols;
};

GsmCodebook build_codebook(const SystemConfig& cfg);

/// Square M-QAM with per-axis reflected Gray labels, unit average energy.
/// Label bits are split MSB-first into an in-phase half and a quadrature half; label 0 maps
/// to the point (1 + j) * scale.
std::vector<cplx> gray_qam(std::size_t qam_order);

GsmBlock map_bits(std::span<const std::uint8_t> bits, const GsmCodebook& book, const SystemConfig& cfg);

/// Inverse of map_bits. Throws ConfigError for a slice whose support is not a TAC or whose
/// active entries are not constellation points.
Bits demap_bits(const CVector& symbols, const GsmCodebook& book, const SystemConfig& cfg);

/// Index of the TAC with the largest energy of `r` on its support, lowest index on ties.
std::size_t best_tac(std::span<const cplx> r, const GsmCodebook& book);

/// Euclidean projection of one per-user vector onto vectors supported on a TAC.
std::vector<cplx> project_support(std::span<const cplx> r, const GsmCodebook& book);

/// Index of the nearest element of `alphabet`, lowest index on ties.
std::size_t nearest_index(cplx v, std::span<const cplx> alphabet);

/// Componentwise nearest-point rounding onto `alphabet`.
std::vector<cplx> project_lattice(std::span<const cplx> v, std::span<const cplx> alphabet);

/// Applies project_support independently to every (channel use, user) slice of a stacked block.
/// If `chosen` is non-null it receives the selected TAC index per slice.
CVector project_support_block(const CVector& r, const GsmCodebook& book, const SystemConfig& cfg,
                              std::vector<std::size_t>* chosen = nullptr);

CVector project_lattice_block(const CVector& v, std::span<const cplx> alphabet);

/// True iff every slice has exactly n_active nonzeros on a TAC and those entries lie in A.
bool is_valid_block(const CVector& symbols, const GsmCodebook& book, const SystemConfig& cfg,
                    double tol = 1e-9);

}  // namespace gsm
