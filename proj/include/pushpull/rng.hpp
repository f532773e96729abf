#pragma once

#include <cstdint>
#include <random>

namespace pushpull {

using Rng = std::mt19937_64;

/// splitmix64 finalizer; a stateless 64-bit mixer.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// Child seed for stream `a` (and optionally `b`) of `base`. Streams with
/// distinct labels are decorrelated; adding labels never perturbs others.
constexpr std::uint64_t derive_seed(std::uint64_t base, std::uint64_t a, std::uint64_t b = 0) noexcept {
    return mix64(mix64(base ^ mix64(a + 0x632be59bd9b4e019ULL)) ^ mix64(b + 0x85157af5ULL));
}

} // namespace pushpull
