#pragma once

#include "gsm/types.hpp"

namespace gsm {

/// Unitary DFT applied along the time axis of a stacked block, i.e. (F (x) I_dim) v for a
/// vector laid out as n consecutive length-`dim` slices. Uses the kernel exp(-2*pi*j*k*t/n)
/// forward and scales both directions by 1/sqrt(n).
///
/// Thread-safe: plans are created once per (n, dim, direction) under a lock and executed on
/// caller-owned buffers.
CVector block_dft(const CVector& v, std::size_t n, std::size_t dim);
CVector block_idft(const CVector& v, std::size_t n, std::size_t dim);

}  // namespace gsm
