#include "gsm/types.hpp"

#include <bit>
#include <limits>

namespace gsm {

std::size_t binomial(std::size_t n, std::size_t k) {
    if (k > n) return 0;
    k = std::min(k, n - k);
    std::size_t result = 1;
    for (std::size_t i = 1; i <= k; ++i) {
        // result * (n - k + i) / i stays integral at every step
        const std::size_t factor = n - k + i;
        if (result > std::numeric_limits<std::size_t>::max() / factor) {
            return std::numeric_limits<std::size_t>::max();
        }
        result = result * factor / i;
    }
    return result;
}

std::size_t SystemConfig::tac_bits() const {
    const std::size_t combos = binomial(n_tx, n_active);
    return combos == 0 ? 0 : static_cast<std::size_t>(std::bit_width(combos) - 1);
}

std::size_t SystemConfig::symbol_bits() const {
    return qam_order == 0 ? 0 : static_cast<std::size_t>(std::countr_zero(qam_order));
}

void SystemConfig::validate() const {
    if (n < 1) throw ConfigError("system.n: block length must be >= 1");
    if (n_users < 1) throw ConfigError("system.users: need at least one user");
    if (n_tx < 1) throw ConfigError("system.tx: need at least one transmit antenna");
    if (n_active < 1) throw ConfigError("system.active: need at least one active antenna");
    if (n_active > n_tx) throw ConfigError("system.active: requires active <= tx (N_a <= N_tx)");
    if (n_rx < 1) throw ConfigError("system.rx: need at least one receive antenna");
    if (!std::has_single_bit(qam_order) || qam_order < 4 || symbol_bits() % 2 != 0) {
        throw ConfigError("system.qam: order must be a power of 4 (square QAM), got " +
                          std::to_string(qam_order));
    }
    if (tac_bits() + n_active * symbol_bits() > 62) {
        throw ConfigError("system: bits per GSM symbol exceed 62");
    }
}

}  // namespace gsm
