#include "gsm/channel.hpp"

#include <cmath>
#include <algorithm>
#include <fstream>
#include <numbers>
#include <sstream>

namespace gsm {

void DelayProfile::validate() const {
    if (taps.empty()) throw ConfigError("profile '" + name + "': needs at least one tap");
    for (std::size_t i = 0; i < taps.size(); ++i) {
        if (!(taps[i].delay_s >= 0.0)) throw ConfigError("profile '" + name + "': negative delay");
        if (!std::isfinite(taps[i].power_db)) throw ConfigError("profile '" + name + "': non-finite power");
        if (i > 0 && !(taps[i].delay_s > taps[i - 1].delay_s)) {
            throw ConfigError("profile '" + name + "': delays must be strictly increasing");
        }
    }
}

DelayProfile etu_profile() {
    return {"etu",
            {{0e-9, -1.0},
             {50e-9, -1.0},
             {120e-9, -1.0},
             {200e-9, 0.0},
             {230e-9, 0.0},
             {500e-9, 0.0},
             {1600e-9, -3.0},
             {2300e-9, -5.0},
             {5000e-9, -7.0}}};
}

DelayProfile flat_profile() { return {"flat", {{0.0, 0.0}}}; }

DelayProfile uniform_profile(std::size_t taps, double sample_period_s) {
    if (taps < 1) throw ConfigError("uniform profile needs at least one tap");
    DelayProfile p{"uniform-" + std::to_string(taps), {}};
    for (std::size_t i = 0; i < taps; ++i) p.taps.push_back({static_cast<double>(i) * sample_period_s, 0.0});
    return p;
}

DelayProfile load_profile_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open profile csv '" + path + "'");
    DelayProfile p{path, {}};
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line[0] == '#') continue;
        std::replace(line.begin(), line.end(), ',', ' ');
        std::istringstream row(line);
        DelayTap tap{};
        if (!(row >> tap.delay_s >> tap.power_db)) {
            if (p.taps.empty() && line_no == 1) continue;  // header
            throw ConfigError(path + ":" + std::to_string(line_no) + ": expected delay_seconds,power_db");
        }
        p.taps.push_back(tap);
    }
    p.validate();
    return p;
}

DelayProfile named_profile(const std::string& name, double sample_period_s) {
    if (name == "etu") return etu_profile();
    if (name == "flat") return flat_profile();
    if (name.rfind("uniform-", 0) == 0) {
        const std::string count = name.substr(8);
        std::size_t used = 0;
        unsigned long taps = 0;
        try {
            taps = std::stoul(count, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used == 0 || used != count.size()) throw ConfigError("bad profile name '" + name + "'");
        return uniform_profile(taps, sample_period_s);
    }
    return load_profile_csv(name);
}

std::vector<std::size_t> SampledProfile::occupied() const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < power.size(); ++i) {
        if (power[i] > 0.0) out.push_back(i);
    }
    return out;
}

SampledProfile sample_profile(const DelayProfile& profile, double sample_period_s) {
    if (!(sample_period_s > 0.0)) throw ConfigError("sample period must be positive");
    profile.validate();
    SampledProfile out;
    for (const auto& tap : profile.taps) {
        const auto index = static_cast<std::size_t>(std::llround(tap.delay_s / sample_period_s));
        if (index >= out.power.size()) out.power.resize(index + 1, 0.0);
        out.power[index] += std::pow(10.0, tap.power_db / 10.0);
    }
    double total = 0.0;
    for (const double p : out.power) total += p;
    for (double& p : out.power) p /= total;
    return out;
}

cplx complex_gaussian(Rng& rng, double variance) {
    std::normal_distribution<double> normal(0.0, std::sqrt(variance / 2.0));
    const double re = normal(rng);
    const double im = normal(rng);
    return {re, im};
}

ChannelRealization draw_realization(const SystemConfig& cfg, const SampledProfile& profile, Rng& rng) {
    if (profile.n_taps() == 0) throw ConfigError("empty sampled profile");
    if (profile.n_taps() > cfg.n_cp + 1) {
        throw ConfigError("channel has " + std::to_string(profile.n_taps()) + " taps but cyclic prefix " +
                          std::to_string(cfg.n_cp) + " only covers " + std::to_string(cfg.n_cp + 1));
    }
    ChannelRealization out;
    const auto rows = static_cast<Eigen::Index>(cfg.n_rx);
    const auto cols = static_cast<Eigen::Index>(cfg.slice_dim());
    for (const double power : profile.power) {
        CMatrix tap(rows, cols);
        // column-major fill order is part of the seeded-determinism contract
        for (Eigen::Index c = 0; c < cols; ++c) {
            for (Eigen::Index r = 0; r < rows; ++r) tap(r, c) = power > 0.0 ? complex_gaussian(rng, power) : cplx{};
        }
        out.gains.push_back(std::move(tap));
    }
    return out;
}

CVector add_cyclic_prefix(const CVector& s, std::size_t n, std::size_t n_cp, std::size_t dim) {
    if (static_cast<std::size_t>(s.size()) != n * dim) throw ConfigError("add_cyclic_prefix: length mismatch");
    if (n_cp > n) throw ConfigError("add_cyclic_prefix: prefix longer than block");
    const auto head = static_cast<Eigen::Index>(n_cp * dim);
    CVector out(static_cast<Eigen::Index>((n + n_cp) * dim));
    out.head(head) = s.tail(head);
    out.tail(s.size()) = s;
    return out;
}

CVector apply_channel(const ChannelRealization& channel, const CVector& s_with_cp, std::size_t n,
                      std::size_t n_cp, double noise_variance, Rng& rng) {
    if (channel.gains.empty()) throw ConfigError("apply_channel: channel has no taps");
    const auto n_rx = static_cast<std::size_t>(channel.gains[0].rows());
    const auto dim = static_cast<std::size_t>(channel.gains[0].cols());
    if (static_cast<std::size_t>(s_with_cp.size()) != (n + n_cp) * dim) {
        throw ConfigError("apply_channel: input length " + std::to_string(s_with_cp.size()) +
                          " does not match (n + n_cp) * dim");
    }
    CVector y = CVector::Zero(static_cast<Eigen::Index>(n * n_rx));
    for (std::size_t t = 0; t < n; ++t) {
        auto out = y.segment(static_cast<Eigen::Index>(t * n_rx), static_cast<Eigen::Index>(n_rx));
        const std::size_t pos = t + n_cp;  // index in the extended block
        for (std::size_t i = 0; i < channel.n_taps() && i <= pos; ++i) {
            out.noalias() += channel.gains[i] *
                             s_with_cp.segment(static_cast<Eigen::Index>((pos - i) * dim), static_cast<Eigen::Index>(dim));
        }
    }
    if (noise_variance > 0.0) {
        for (Eigen::Index i = 0; i < y.size(); ++i) y[i] += complex_gaussian(rng, noise_variance);
    }
    return y;
}

FrequencyDomainChannel to_frequency(const ChannelRealization& channel, std::size_t n) {
    FrequencyDomainChannel out;
    out.bins.reserve(n);
    for (std::size_t k = 0; k < n; ++k) {
        CMatrix hk = CMatrix::Zero(channel.gains[0].rows(), channel.gains[0].cols());
        for (std::size_t i = 0; i < channel.n_taps(); ++i) {
            // reduce k*i mod n first so the angle stays accurate for long blocks
            const double angle = -2.0 * std::numbers::pi * static_cast<double>((k * i) % n) / static_cast<double>(n);
            hk += channel.gains[i] * std::polar(1.0, angle);
        }
        out.bins.push_back(std::move(hk));
    }
    return out;
}

CVector apply_frequency(const FrequencyDomainChannel& h, const CVector& s_freq) {
    const auto rows = h.bins[0].rows();
    const auto cols = h.bins[0].cols();
    if (s_freq.size() != static_cast<Eigen::Index>(h.n()) * cols) {
        throw ConfigError("apply_frequency: length mismatch");
    }
    CVector y(static_cast<Eigen::Index>(h.n()) * rows);
    for (std::size_t k = 0; k < h.n(); ++k) {
        const auto ki = static_cast<Eigen::Index>(k);
        y.segment(ki * rows, rows).noalias() = h.bins[k] * s_freq.segment(ki * cols, cols);
    }
    return y;
}

double noise_variance_for_snr(const SystemConfig& cfg, double snr_db) {
    const double signal = static_cast<double>(cfg.n_users * cfg.n_active);
    return signal / std::pow(10.0, snr_db / 10.0);
}

}  // namespace gsm
