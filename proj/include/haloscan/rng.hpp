#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace haloscan {

// splitmix64 finaliser.
constexpr std::uint64_t mix64(std::uint64_t z) {
    z += 0x9E3779B97F4A7C15ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

// Child seed that depends only on the parent seed and the labels, so that
// results never depend on the order in which work is scheduled.
constexpr std::uint64_t derive_seed(std::uint64_t parent, std::initializer_list<std::uint64_t> labels) {
    std::uint64_t s = mix64(parent);
    for (std::uint64_t l : labels) s = mix64(s ^ mix64(l + 0x632BE59BD9B4E019ULL));
    return s;
}

using Rng = std::mt19937_64;

}  // namespace haloscan
