#pragma once

#include <cstdint>
#include <random>

namespace sysrel {

using Rng = std::mt19937_64;

/// SplitMix64 finalizer; used to derive independent stream seeds from keys.
constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

/// Seed for the stream identified by (base, keys...). Distinct key tuples give
/// statistically independent streams; the mapping never changes between releases.
template <class... Keys>
constexpr std::uint64_t derive_seed(std::uint64_t base, Keys... keys) noexcept {
    std::uint64_t h = splitmix64(base);
    ((h = splitmix64(h ^ static_cast<std::uint64_t>(keys))), ...);
    return h;
}

template <class... Keys>
Rng make_rng(std::uint64_t base, Keys... keys) {
    return Rng(derive_seed(base, keys...));
}

}  // namespace sysrel
