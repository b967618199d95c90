#pragma once

#include <cstdint>
#include <random>

namespace sparsevar {

using Rng = std::mt19937_64;

namespace detail {

constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

} // namespace detail

/// Seed of stream `index` under `master`. Pure function of its arguments, so
/// work items can be scheduled on any worker without changing their draws.
constexpr std::uint64_t stream_seed(std::uint64_t master, std::uint64_t index) noexcept {
    return detail::splitmix64(detail::splitmix64(master) ^ detail::splitmix64(index + 0x632BE59BD9B4E019ULL));
}

/// Two-level variant: e.g. (master, Monte-Carlo trial, bootstrap replicate).
constexpr std::uint64_t stream_seed(std::uint64_t master, std::uint64_t index, std::uint64_t sub) noexcept {
    return stream_seed(stream_seed(master, index), sub);
}

inline Rng make_rng(std::uint64_t seed) {
    return Rng(seed);
}

} // namespace sparsevar
