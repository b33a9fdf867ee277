// SPDX-License-Identifier: Apache-2.0
//
// ocirloc: indoor optical wireless channel simulation and fingerprint localization

#pragma once

#include <cmath>
#include <cstdint>
#include <initializer_list>

#include "ocirloc/common.hpp"

namespace ocirloc {

/// splitmix64 step; the backbone of all seeding and stream derivation here.
inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ull);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

/// Mixes an arbitrary list of stream components into one key. Used to give
/// every (seed, location, detector, sample, ...) tuple its own independent
/// stream so parallel and serial synthesis draw identical numbers.
inline std::uint64_t mix_key(std::initializer_list<std::uint64_t> parts) {
    std::uint64_t state = 0x6a09e667f3bcc908ull;
    for (std::uint64_t p : parts) {
        state ^= p;
        (void)splitmix64(state);
        state ^= state >> 29;
    }
    std::uint64_t s = state;
    return splitmix64(s);
}

inline double u64_to_unit_double(std::uint64_t x) {
    return static_cast<double>(x >> 11) * 0x1.0p-53; // [0, 1)
}

/// Counter-based generator: stateless streams, reproducible regardless of
/// evaluation order or thread count.
class CounterRng {
  public:
    explicit CounterRng(std::uint64_t key) : key_(key) {}

    std::uint64_t next_u64() {
        std::uint64_t s = key_ + 0x9e3779b97f4a7c15ull * (++counter_);
        return splitmix64(s);
    }

    double next_unit() { return u64_to_unit_double(next_u64()); }

    /// Uniform integer in [0, bound) by rejection; unbiased and portable.
    std::uint64_t next_below(std::uint64_t bound) {
        std::uint64_t threshold = (0ull - bound) % bound;
        for (;;) {
            std::uint64_t r = next_u64();
            if (r >= threshold)
                return r % bound;
        }
    }

    /// Standard normal via Box-Muller.
    double next_normal() {
        double u1 = next_unit();
        double u2 = next_unit();
        while (u1 <= 0.0) // log(0) guard; astronomically rare
            u1 = next_unit();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(kTwoPi * u2);
    }

  private:
    std::uint64_t key_;
    std::uint64_t counter_ = 0;
};

/// One normal draw addressed purely by (key, index): the noise model uses this
/// so sample k of detector q at location i is a fixed function of the seed.
inline double indexed_normal(std::uint64_t key, std::uint64_t index) {
    std::uint64_t s = mix_key({key, index});
    std::uint64_t a = splitmix64(s);
    std::uint64_t b = splitmix64(s);
    double u1 = u64_to_unit_double(a);
    double u2 = u64_to_unit_double(b);
    if (u1 <= 0.0) u1 = 0x1.0p-53;
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(kTwoPi * u2);
}

} // namespace ocirloc
