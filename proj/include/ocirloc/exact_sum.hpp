// SPDX-License-Identifier: Apache-2.0
//
// ocirloc: indoor optical wireless channel simulation and fingerprint localization

#pragma once

#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <stdexcept>

namespace ocirloc {

/// Exact accumulator for nonnegative doubles.
///
/// A wide fixed-point register (36 x 64-bit limbs spanning every finite
/// double, subnormals included) into which each addend's mantissa is added
/// as an integer. Addition of integers commutes, so the final correctly
/// rounded value is independent of summation order. The impulse-response
/// binner relies on that: profiles come out bit-identical no matter how
/// patches are enumerated, and binned totals match un-binned reference sums
/// to the last ulp.
class ExactSum {
  public:
    void add(double v) {
        if (v == 0.0)
            return;
        const std::uint64_t bits = std::bit_cast<std::uint64_t>(v);
        if (bits >> 63)
            throw std::invalid_argument("ExactSum: negative addend");
        const int biased = static_cast<int>(bits >> 52) & 0x7ff;
        if (biased == 0x7ff)
            throw std::invalid_argument("ExactSum: non-finite addend");
        std::uint64_t mant = bits & ((1ull << 52) - 1);
        if (biased != 0)
            mant |= 1ull << 52;
        // v = mant * 2^(e2); place mant at fixed-point bit (e2 - kBaseExp2).
        const int pos = (biased != 0 ? biased : 1) - 1075 - kBaseExp2;
        const int li = pos >> 6;
        const int off = pos & 63;
        add_at(li, mant << off);
        if (off != 0)
            add_at(li + 1, mant >> (64 - off));
    }

    /// Correctly rounded (nearest-even) double value of the register.
    double round_to_double() const {
        int top = kLimbs - 1;
        while (top >= 0 && limb_[top] == 0)
            --top;
        if (top < 0)
            return 0.0;
        const int hb = 63 - std::countl_zero(limb_[top]);
        const long msb = static_cast<long>(top) * 64 + hb;
        if (msb <= 52) // value already fits a 53-bit mantissa at the base scale
            return std::ldexp(static_cast<double>(limb_[0]), kBaseExp2);

        const long p = msb - 52; // LSB position of the 53-bit mantissa window
        std::uint64_t mant = read_shifted(p);
        const bool guard = bit_at(p - 1);
        bool sticky = false;
        if (guard) {
            sticky = any_below(p - 1);
            if (sticky || (mant & 1ull))
                ++mant;
        }
        long e = p;
        if (mant == (1ull << 53)) {
            mant >>= 1;
            ++e;
        }
        return std::ldexp(static_cast<double>(mant), static_cast<int>(e) + kBaseExp2);
    }

    bool is_zero() const {
        for (std::uint64_t l : limb_)
            if (l != 0)
                return false;
        return true;
    }

  private:
    // Bit 0 of limb 0 weighs 2^kBaseExp2; covers 2^-1152 .. 2^1151.
    static constexpr int kBaseExp2 = -1152;
    static constexpr int kLimbs = 36;

    void add_at(int i, std::uint64_t v) {
        while (v != 0) {
            if (i >= kLimbs)
                throw std::overflow_error("ExactSum: accumulator overflow");
            const std::uint64_t old = limb_[i];
            limb_[i] = old + v;
            if (limb_[i] >= old)
                return;
            v = 1; // carry
            ++i;
        }
    }

    // 53 bits starting at bit position p (p >= 1).
    std::uint64_t read_shifted(long p) const {
        const int li = static_cast<int>(p >> 6);
        const int off = static_cast<int>(p & 63);
        std::uint64_t out = limb_[li] >> off;
        if (off != 0 && li + 1 < kLimbs)
            out |= limb_[li + 1] << (64 - off);
        return out & ((1ull << 53) - 1);
    }

    bool bit_at(long pos) const {
        return (limb_[pos >> 6] >> (pos & 63)) & 1ull;
    }

    bool any_below(long pos) const {
        const int li = static_cast<int>(pos >> 6);
        const int off = static_cast<int>(pos & 63);
        if (off != 0 && (limb_[li] & ((1ull << off) - 1)) != 0)
            return true;
        for (int i = li - 1; i >= 0; --i)
            if (limb_[i] != 0)
                return true;
        return false;
    }

    std::array<std::uint64_t, kLimbs> limb_{};
};

} // namespace ocirloc
