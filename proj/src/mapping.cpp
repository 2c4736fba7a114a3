#include "gsm/mapping.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace gsm {

namespace {

// Lexicographic successor of an increasing index tuple over [0, n); false when exhausted.
bool next_combination(Tac& c, std::size_t n) {
    const std::size_t k = c.size();
    for (std::size_t i = k; i-- > 0;) {
        if (c[i] < n - k + i) {
            ++c[i];
            for (std::size_t j = i + 1; j < k; ++j) c[j] = c[j - 1] + 1;
            return true;
        }
    }
    return false;
}

std::uint64_t read_bits(std::span<const std::uint8_t> bits, std::size_t pos, std::size_t count) {
    std::uint64_t v = 0;
    for (std::size_t i = 0; i < count; ++i) v = (v << 1) | (bits[pos + i] & 1u);
    return v;
}

void write_bits(Bits& out, std::uint64_t v, std::size_t count) {
    for (std::size_t i = count; i-- > 0;) out.push_back(static_cast<std::uint8_t>((v >> i) & 1u));
}

}  // namespace

std::vector<cplx> gray_qam(std::size_t qam_order) {
    const auto side = static_cast<std::size_t>(std::llround(std::sqrt(static_cast<double>(qam_order))));
    if (side * side != qam_order || side < 2 || (side & (side - 1)) != 0) {
        throw ConfigError("qam order must be a power of 4, got " + std::to_string(qam_order));
    }
    std::size_t axis_bits = 0;
    while ((std::size_t{1} << axis_bits) < side) ++axis_bits;

    // amplitude of the level whose Gray code equals `code`
    std::vector<double> level_of_code(side);
    for (std::size_t level = 0; level < side; ++level) {
        const std::size_t code = level ^ (level >> 1);
        level_of_code[code] = static_cast<double>(side - 1) - 2.0 * static_cast<double>(level);
    }
    const double scale = std::sqrt(3.0 / (2.0 * (static_cast<double>(qam_order) - 1.0)));

    std::vector<cplx> points(qam_order);
    for (std::size_t label = 0; label < qam_order; ++label) {
        const std::size_t i_code = label >> axis_bits;
        const std::size_t q_code = label & (side - 1);
        points[label] = cplx(level_of_code[i_code], level_of_code[q_code]) * scale;
    }
    return points;
}

GsmCodebook::GsmCodebook(std::size_t n_tx, std::size_t n_active, std::size_t qam_order)
    : n_tx_(n_tx), n_active_(n_active) {
    SystemConfig probe;
    probe.n_tx = n_tx;
    probe.n_active = n_active;
    probe.qam_order = qam_order;
    probe.validate();
    tac_bits_ = probe.tac_bits();
    symbol_bits_ = probe.symbol_bits();

    const std::size_t keep = probe.n_comb();
    Tac c(n_active);
    for (std::size_t i = 0; i < n_active; ++i) c[i] = i;
    tacs_.reserve(keep);
    do {
        tacs_.push_back(c);
    } while (tacs_.size() < keep && next_combination(c, n_tx));

    points_ = gray_qam(qam_order);
    points_with_zero_ = points_;
    points_with_zero_.emplace_back(0.0, 0.0);
    for (const auto& p : points_) max_coordinate_ = std::max(max_coordinate_, std::abs(p.real()));
}

std::size_t GsmCodebook::find_tac(std::span<const std::size_t> tac) const {
    for (std::size_t i = 0; i < tacs_.size(); ++i) {
        if (std::ranges::equal(tacs_[i], tac)) return i;
    }
    return tacs_.size();
}

std::size_t GsmCodebook::find_point(cplx value, double tol) const {
    for (std::size_t i = 0; i < points_.size(); ++i) {
        if (std::abs(points_[i] - value) <= tol) return i;
    }
    return points_.size();
}

GsmCodebook build_codebook(const SystemConfig& cfg) {
    cfg.validate();
    return GsmCodebook(cfg.n_tx, cfg.n_active, cfg.qam_order);
}

GsmBlock map_bits(std::span<const std::uint8_t> bits, const GsmCodebook& book, const SystemConfig& cfg) {
    if (bits.size() != cfg.block_bits()) {
        throw ConfigError("map_bits: expected " + std::to_string(cfg.block_bits()) + " bits, got " +
                          std::to_string(bits.size()));
    }
    GsmBlock block;
    block.bits.assign(bits.begin(), bits.end());
    block.symbols = CVector::Zero(static_cast<Eigen::Index>(cfg.block_len()));

    const auto points = book.constellation();
    std::size_t pos = 0;
    for (std::size_t t = 0; t < cfg.n; ++t) {
        for (std::size_t p = 0; p < cfg.n_users; ++p) {
            const auto tac_index = read_bits(bits, pos, book.tac_bits());
            pos += book.tac_bits();
            const Tac& tac = book.tacs()[tac_index];
            const std::size_t base = t * cfg.slice_dim() + p * cfg.n_tx;
            for (const std::size_t antenna : tac) {
                const auto label = read_bits(bits, pos, book.symbol_bits());
                pos += book.symbol_bits();
                block.symbols[static_cast<Eigen::Index>(base + antenna)] = points[label];
            }
        }
    }
    return block;
}

Bits demap_bits(const CVector& symbols, const GsmCodebook& book, const SystemConfig& cfg) {
    if (static_cast<std::size_t>(symbols.size()) != cfg.block_len()) {
        throw ConfigError("demap_bits: block length mismatch");
    }
    Bits out;
    out.reserve(cfg.block_bits());
    Tac support;
    for (std::size_t t = 0; t < cfg.n; ++t) {
        for (std::size_t p = 0; p < cfg.n_users; ++p) {
            const std::size_t base = t * cfg.slice_dim() + p * cfg.n_tx;
            support.clear();
            for (std::size_t u = 0; u < cfg.n_tx; ++u) {
                if (symbols[static_cast<Eigen::Index>(base + u)] != cplx(0.0, 0.0)) support.push_back(u);
            }
            const std::size_t tac_index = book.find_tac(support);
            if (tac_index == book.tacs().size()) {
                throw ConfigError("demap_bits: slice (t=" + std::to_string(t) + ", user=" + std::to_string(p) +
                                  ") has support outside the TAC list");
            }
            write_bits(out, tac_index, book.tac_bits());
            for (const std::size_t antenna : support) {
                const std::size_t label = book.find_point(symbols[static_cast<Eigen::Index>(base + antenna)]);
                if (label == book.qam_order()) {
                    throw ConfigError("demap_bits: off-constellation value at (t=" + std::to_string(t) +
                                      ", user=" + std::to_string(p) + ")");
                }
                write_bits(out, label, book.symbol_bits());
            }
        }
    }
    return out;
}

std::size_t best_tac(std::span<const cplx> r, const GsmCodebook& book) {
    std::size_t best = 0;
    double best_energy = -1.0;
    const auto& tacs = book.tacs();
    for (std::size_t i = 0; i < tacs.size(); ++i) {
        double energy = 0.0;
        for (const std::size_t a : tacs[i]) energy += std::norm(r[a]);
        if (energy > best_energy) {
            best_energy = energy;
            best = i;
        }
    }
    return best;
}

std::vector<cplx> project_support(std::span<const cplx> r, const GsmCodebook& book) {
    if (r.size() != book.n_tx()) throw ConfigError("project_support: vector length must equal n_tx");
    std::vector<cplx> out(r.size(), cplx(0.0, 0.0));
    for (const std::size_t a : book.tacs()[best_tac(r, book)]) out[a] = r[a];
    return out;
}

std::size_t nearest_index(cplx v, std::span<const cplx> alphabet) {
    std::size_t best = 0;
    double best_dist = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < alphabet.size(); ++i) {
        const double d = std::norm(v - alphabet[i]);
        if (d < best_dist) {
            best_dist = d;
            best = i;
        }
    }
    return best;
}

std::vector<cplx> project_lattice(std::span<const cplx> v, std::span<const cplx> alphabet) {
    std::vector<cplx> out(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) out[i] = alphabet[nearest_index(v[i], alphabet)];
    return out;
}

CVector project_support_block(const CVector& r, const GsmCodebook& book, const SystemConfig& cfg,
                              std::vector<std::size_t>* chosen) {
    CVector out = CVector::Zero(r.size());
    if (chosen) chosen->assign(cfg.n * cfg.n_users, 0);
    for (std::size_t t = 0; t < cfg.n; ++t) {
        for (std::size_t p = 0; p < cfg.n_users; ++p) {
            const std::size_t base = t * cfg.slice_dim() + p * cfg.n_tx;
            const std::span<const cplx> slice(r.data() + base, cfg.n_tx);
            const std::size_t tac = best_tac(slice, book);
            if (chosen) (*chosen)[t * cfg.n_users + p] = tac;
            for (const std::size_t a : book.tacs()[tac]) {
                out[static_cast<Eigen::Index>(base + a)] = r[static_cast<Eigen::Index>(base + a)];
            }
        }
    }
    return out;
}

CVector project_lattice_block(const CVector& v, std::span<const cplx> alphabet) {
    CVector out(v.size());
    for (Eigen::Index i = 0; i < v.size(); ++i) out[i] = alphabet[nearest_index(v[i], alphabet)];
    return out;
}

bool is_valid_block(const CVector& symbols, const GsmCodebook& book, const SystemConfig& cfg, double tol) {
    if (static_cast<std::size_t>(symbols.size()) != cfg.block_len()) return false;
    Tac support;
    for (std::size_t t = 0; t < cfg.n; ++t) {
        for (std::size_t p = 0; p < cfg.n_users; ++p) {
            const std::size_t base = t * cfg.slice_dim() + p * cfg.n_tx;
            support.clear();
            for (std::size_t u = 0; u < cfg.n_tx; ++u) {
                const cplx v = symbols[static_cast<Eigen::Index>(base + u)];
                if (std::abs(v) > tol) {
                    if (book.find_point(v, tol) == book.qam_order()) return false;
                    support.push_back(u);
                }
            }
            if (book.find_tac(support) == book.tacs().size()) return false;
        }
    }
    return true;
}

}  // namespace gsm
