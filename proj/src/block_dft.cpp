#include "gsm/block_dft.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <tuple>

#include <fftw3.h>

namespace gsm {

namespace {

class PlanCache {
public:
    ~PlanCache() {
        for (auto& [key, plan] : plans_) fftw_destroy_plan(plan);
    }

    fftw_plan get(std::size_t n, std::size_t dim, int sign) {
        std::lock_guard lock(mutex_);
        const auto key = std::make_tuple(n, dim, sign);
        if (auto it = plans_.find(key); it != plans_.end()) return it->second;

        // Planning with FFTW_ESTIMATE leaves the scratch arrays untouched.
        const auto total = n * dim;
        auto* in = fftw_alloc_complex(total);
        auto* out = fftw_alloc_complex(total);
        const int len = static_cast<int>(n);
        fftw_plan plan = fftw_plan_many_dft(1, &len, static_cast<int>(dim), in, nullptr, static_cast<int>(dim), 1,
                                            out, nullptr, static_cast<int>(dim), 1, sign,
                                            FFTW_ESTIMATE | FFTW_UNALIGNED);
        fftw_free(in);
        fftw_free(out);
        plans_.emplace(key, plan);
        return plan;
    }

private:
    std::mutex mutex_;
    std::map<std::tuple<std::size_t, std::size_t, int>, fftw_plan> plans_;
};

PlanCache& cache() {
    static PlanCache instance;
    return instance;
}

CVector transform(const CVector& v, std::size_t n, std::size_t dim, int sign) {
    if (static_cast<std::size_t>(v.size()) != n * dim) {
        throw ConfigError("block_dft: vector length " + std::to_string(v.size()) + " != n*dim");
    }
    CVector in = v;  // FFTW may not read from const storage
    CVector out(v.size());
    fftw_plan plan = cache().get(n, dim, sign);
    fftw_execute_dft(plan, reinterpret_cast<fftw_complex*>(in.data()), reinterpret_cast<fftw_complex*>(out.data()));
    out *= 1.0 / std::sqrt(static_cast<double>(n));
    return out;
}

}  // namespace

CVector block_dft(const CVector& v, std::size_t n, std::size_t dim) {
    return transform(v, n, dim, FFTW_FORWARD);
}

CVector block_idft(const CVector& v, std::size_t n, std::size_t dim) {
    return transform(v, n, dim, FFTW_BACKWARD);
}

}  // namespace gsm
