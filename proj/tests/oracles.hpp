#pragma once

// Reference computations used only by tests. Nothing here calls into the FFT or
// per-frequency code paths of the library.

#include <cmath>
#include <limits>
#include <utility>
#include <numbers>
#include <vector>

#include "gsm/channel.hpp"
#include "gsm/mapping.hpp"

namespace gsm::test {

/// Direct O(n^2) unitary DFT along the time axis of a stacked block; sign -1 is forward.
inline CVector naive_block_dft(const CVector& v, std::size_t n, std::size_t dim, int sign = -1) {
    CVector out = CVector::Zero(v.size());
    const double scale = 1.0 / std::sqrt(static_cast<double>(n));
    for (std::size_t k = 0; k < n; ++k) {
        for (std::size_t t = 0; t < n; ++t) {
            const double angle = sign * 2.0 * std::numbers::pi * static_cast<double>((k * t) % n) / static_cast<double>(n);
            const cplx w = std::polar(scale, angle);
            for (std::size_t j = 0; j < dim; ++j) {
                out[static_cast<Eigen::Index>(k * dim + j)] += w * v[static_cast<Eigen::Index>(t * dim + j)];
            }
        }
    }
    return out;
}

/// Dense block-circulant channel operator: block (t, s) holds tap (t - s) mod n.
inline CMatrix block_circulant(const ChannelRealization& ch, std::size_t n) {
    const auto rows = ch.gains[0].rows();
    const auto cols = ch.gains[0].cols();
    CMatrix omega = CMatrix::Zero(static_cast<Eigen::Index>(n) * rows, static_cast<Eigen::Index>(n) * cols);
    for (std::size_t t = 0; t < n; ++t) {
        for (std::size_t i = 0; i < ch.n_taps(); ++i) {
            const std::size_t s = (t + n - i % n) % n;
            omega.block(static_cast<Eigen::Index>(t) * rows, static_cast<Eigen::Index>(s) * cols, rows, cols) +=
                ch.gains[i];
        }
    }
    return omega;
}

/// ||y - Omega s||^2 with the dense circulant operator.
inline double time_domain_objective(const ChannelRealization& ch, const CVector& y_time, const CVector& s, std::size_t n) {
    return (y_time - block_circulant(ch, n) * s).squaredNorm();
}

/// Every valid per-user slice, enumerated independently of the library oracle.
inline std::vector<std::vector<cplx>> all_slices(const GsmCodebook& book) {
    std::vector<std::vector<cplx>> out;
    const auto pts = book.constellation();
    for (const auto& tac : book.tacs()) {
        std::vector<std::size_t> labels(tac.size(), 0);
        while (true) {
            std::vector<cplx> slice(book.n_tx(), cplx{});
            for (std::size_t i = 0; i < tac.size(); ++i) slice[tac[i]] = pts[labels[i]];
            out.push_back(slice);
            std::size_t i = tac.size();
            while (i > 0 && ++labels[i - 1] == pts.size()) labels[--i] = 0;
            if (i == 0) break;
        }
    }
    return out;
}

/// Brute-force nearest point, scanning every element.
inline std::size_t brute_nearest(cplx v, std::span<const cplx> alphabet) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < alphabet.size(); ++i) {
        if (std::norm(v - alphabet[i]) < std::norm(v - alphabet[best])) best = i;
    }
    return best;
}

/// Brute-force support projection: energy of every TAC, first maximum wins.
inline std::vector<cplx> brute_support(std::span<const cplx> r, const GsmCodebook& book) {
    std::vector<double> energy;
    for (const auto& tac : book.tacs()) {
        double e = 0.0;
        for (auto a : tac) e += std::abs(r[a]) * std::abs(r[a]);
        energy.push_back(e);
    }
    std::size_t best = 0;
    for (std::size_t i = 1; i < energy.size(); ++i) {
        if (energy[i] > energy[best]) best = i;
    }
    std::vector<cplx> out(r.size(), cplx{});
    for (auto a : book.tacs()[best]) out[a] = r[a];
    return out;
}

inline CVector random_cvector(Rng& rng, std::size_t len, double scale = 1.0) {
    CVector v(static_cast<Eigen::Index>(len));
    for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = complex_gaussian(rng, scale);
    return v;
}

inline Bits random_bits(Rng& rng, std::size_t count) {
    Bits b(count);
    for (auto& x : b) x = static_cast<std::uint8_t>(rng() & 1u);
    return b;
}

/// Random block through a random channel, for detector-level tests.
struct Instance {
    SystemConfig cfg;
    GsmCodebook book;
    ChannelRealization ch;
    FrequencyDomainChannel h;
    Bits bits;
    CVector s;
    CVector y_time;
    CVector y_freq;
};

inline Instance make_test_instance(const SystemConfig& cfg, std::size_t taps, double noise_variance, Rng& rng) {
    Instance out{cfg, build_codebook(cfg), {}, {}, {}, {}, {}, {}};
    out.ch = draw_realization(cfg, sample_profile(uniform_profile(taps, 1.0), 1.0), rng);
    out.h = to_frequency(out.ch, cfg.n);
    out.bits = random_bits(rng, cfg.block_bits());
    out.s = map_bits(out.bits, out.book, cfg).symbols;
    out.y_time = apply_channel(out.ch, add_cyclic_prefix(out.s, cfg.n, cfg.n_cp, cfg.slice_dim()), cfg.n, cfg.n_cp,
                               noise_variance, rng);
    out.y_freq = naive_block_dft(out.y_time, cfg.n, cfg.n_rx);
    return out;
}

/// Exhaustive minimum of the time-domain objective over every valid block; first minimizer wins.
inline std::pair<CVector, double> brute_ml(const Instance& inst) {
    const auto slices = all_slices(inst.book);
    const std::size_t n_slices = inst.cfg.n * inst.cfg.n_users;
    const std::size_t n_tx = inst.cfg.n_tx;
    const CMatrix omega = block_circulant(inst.ch, inst.cfg.n);
    std::vector<std::size_t> idx(n_slices, 0);
    CVector best;
    double f_best = std::numeric_limits<double>::infinity();
    CVector s(static_cast<Eigen::Index>(n_slices * n_tx));
    while (true) {
        for (std::size_t j = 0; j < n_slices; ++j)
            for (std::size_t a = 0; a < n_tx; ++a) s[static_cast<Eigen::Index>(j * n_tx + a)] = slices[idx[j]][a];
        const double f = (inst.y_time - omega * s).squaredNorm();
        if (f < f_best) {
            f_best = f;
            best = s;
        }
        std::size_t j = n_slices;
        while (j > 0 && ++idx[j - 1] == slices.size()) idx[--j] = 0;
        if (j == 0) break;
    }
    return {best, f_best};
}

}  // namespace gsm::test
