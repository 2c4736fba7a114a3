#pragma once

#include <cstdint>
#include <initializer_list>

namespace gsm {

/// SplitMix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Child seed for a position in a nested stream: folds each index into the running state
/// with mix64, so (master, a, b) and (master, b, a) give unrelated seeds.
constexpr std::uint64_t derive_seed(std::uint64_t master, std::initializer_list<std::uint64_t> path) noexcept {
    std::uint64_t state = mix64(master);
    for (const std::uint64_t index : path) state = mix64(state ^ mix64(index + 0x632be59bd9b4e019ULL));
    return state;
}

}  // namespace gsm
