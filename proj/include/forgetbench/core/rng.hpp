#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace forgetbench {

using Rng = std::mt19937_64;

// splitmix64 finalizer; spreads nearby seeds across the state space.
constexpr std::uint64_t mix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// Derives an independent seed for a named consumer ("init", "shuffle", "ga",
// "som", ...) so that adding draws in one component never perturbs another.
constexpr std::uint64_t derive_seed(std::uint64_t seed, std::string_view stream) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (char c : stream) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001b3ULL;
    }
    return mix64(seed ^ mix64(h));
}

inline Rng make_rng(std::uint64_t seed, std::string_view stream) {
    return Rng{derive_seed(seed, stream)};
}

}  // namespace forgetbench
