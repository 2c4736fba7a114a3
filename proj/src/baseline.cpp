#include "gsm/baseline.hpp"

#include <cmath>
#include <sstream>

#include "gsm/admm_detector.hpp"
#include "gsm/block_dft.hpp"

namespace gsm {

CVector mmse_detect(const CVector& y_freq, const FrequencyDomainChannel& h, const GsmCodebook& book,
                    const SystemConfig& cfg, double noise_variance) {
    const auto rows = static_cast<Eigen::Index>(cfg.n_rx);
    const auto dim = static_cast<Eigen::Index>(cfg.slice_dim());
    if (h.n() != cfg.n || y_freq.size() != static_cast<Eigen::Index>(cfg.n) * rows) {
        throw ConfigError("mmse_detect: dimensions do not match the system config");
    }
    const double reg = std::max(noise_variance, 1e-12);
    CVector s_freq(static_cast<Eigen::Index>(cfg.n) * dim);
    for (std::size_t k = 0; k < cfg.n; ++k) {
        const auto ki = static_cast<Eigen::Index>(k);
        CMatrix gram = h.bins[k].adjoint() * h.bins[k];
        gram.diagonal().array() += reg;
        s_freq.segment(ki * dim, dim) = gram.llt().solve(h.bins[k].adjoint() * y_freq.segment(ki * rows, rows));
    }
    const CVector s_time = block_idft(s_freq, cfg.n, cfg.slice_dim());

    std::vector<std::size_t> chosen;
    CVector out = project_support_block(s_time, book, cfg, &chosen);
    const auto points = book.constellation();
    for (Eigen::Index i = 0; i < out.size(); ++i) {
        if (out[i] != cplx(0.0, 0.0)) out[i] = points[nearest_index(out[i], points)];
    }
    // an exact zero on a chosen antenna still has to carry a symbol
    for (std::size_t t = 0; t < cfg.n; ++t) {
        for (std::size_t p = 0; p < cfg.n_users; ++p) {
            const std::size_t base = t * cfg.slice_dim() + p * cfg.n_tx;
            for (const std::size_t a : book.tacs()[chosen[t * cfg.n_users + p]]) {
                auto& v = out[static_cast<Eigen::Index>(base + a)];
                if (v == cplx(0.0, 0.0)) v = points[nearest_index(v, points)];
            }
        }
    }
    return out;
}

double ml_candidate_count(const SystemConfig& cfg) {
    const double per_slice = static_cast<double>(cfg.n_comb()) *
                             std::pow(static_cast<double>(cfg.qam_order), static_cast<double>(cfg.n_active));
    return std::pow(per_slice, static_cast<double>(cfg.n * cfg.n_users));
}

MlResult mld_oracle(const CVector& y_freq, const FrequencyDomainChannel& h, const GsmCodebook& book,
                    const SystemConfig& cfg, double guard) {
    const double count = ml_candidate_count(cfg);
    if (count > guard) {
        std::ostringstream msg;
        msg << "mld_oracle: " << count << " candidate blocks exceed the guard bound " << guard;
        throw GuardBoundError(msg.str(), count);
    }

    // every valid per-user slice, in TAC-major then label order
    const std::size_t m = book.qam_order();
    std::vector<std::vector<cplx>> slices;
    for (const Tac& tac : book.tacs()) {
        std::size_t labels_total = 1;
        for (std::size_t i = 0; i < tac.size(); ++i) labels_total *= m;
        for (std::size_t code = 0; code < labels_total; ++code) {
            std::vector<cplx> slice(cfg.n_tx, cplx(0.0, 0.0));
            std::size_t rem = code;
            for (std::size_t i = tac.size(); i-- > 0;) {
                slice[tac[i]] = book.constellation()[rem % m];
                rem /= m;
            }
            slices.push_back(std::move(slice));
        }
    }

    const std::size_t positions = cfg.n * cfg.n_users;
    std::vector<std::size_t> digits(positions, 0);
    CVector s(static_cast<Eigen::Index>(cfg.block_len()));
    auto place = [&](std::size_t pos) {
        const auto base = static_cast<Eigen::Index>(pos * cfg.n_tx);
        for (std::size_t u = 0; u < cfg.n_tx; ++u) s[base + static_cast<Eigen::Index>(u)] = slices[digits[pos]][u];
    };
    for (std::size_t pos = 0; pos < positions; ++pos) place(pos);

    MlResult best{s, std::numeric_limits<double>::infinity()};
    while (true) {
        const double f = objective(h, y_freq, s, cfg);
        if (f < best.f_min) {
            best.f_min = f;
            best.s_ml = s;
        }
        // odometer: the last slice position varies fastest
        std::size_t pos = positions;
        while (pos > 0) {
            --pos;
            if (++digits[pos] < slices.size()) {
                place(pos);
                break;
            }
            digits[pos] = 0;
            place(pos);
            if (pos == 0) return best;
        }
        if (positions == 0) return best;
    }
}

}  // namespace gsm
