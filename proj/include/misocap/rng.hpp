// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>

namespace misocap {

/// Counter-based random stream: draw i is a pure function of (seed, i),
/// so Monte-Carlo results do not depend on how work is split across
/// threads or in which order samples are requested.
struct SeededRng {
    std::uint64_t seed = 0;
};

namespace rng {

// SplitMix64 output function over a Weyl sequence. Passes the usual
// statistical batteries and is bijective per counter step.
inline std::uint64_t at(std::uint64_t seed, std::uint64_t counter) {
    std::uint64_t z = seed + (counter + 1) * 0x9E3779B97F4A7C15ull;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

/// Uniform on (0, 1]; never returns 0, so log(u) is always finite.
inline double uniform_unit(std::uint64_t seed, std::uint64_t counter) {
    return static_cast<double>((at(seed, counter) >> 11) + 1) * 0x1.0p-53;
}

} // namespace rng
} // namespace misocap
