// Licensed under the Apache License, Version 2.0 (the "License"); you
// may not use this file except in compliance with the License.  You
// may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or
// implied.  See the License for the specific language governing
// permissions and limitations under the License.

#pragma once

#include <cstdint>

namespace tailfit {

namespace detail {
// SplitMix64 finalizer. Integer-only, so results are identical on every
// platform with 64-bit arithmetic.
inline std::uint64_t mix64(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

inline constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ull;
}  // namespace detail

// Counter-based deterministic generator: output i is mix64(seed + golden * i),
// a pure function of (seed, counter). Identical seeds give identical
// sequences; copies replay independently.
class RngStream {
  public:
    explicit RngStream(std::uint64_t seed) : seed_(seed) {}

    std::uint64_t seed() const { return seed_; }
    std::uint64_t counter() const { return counter_; }

    std::uint64_t next_u64() {
        ++counter_;
        return detail::mix64(seed_ + detail::kGolden * counter_);
    }

    // Uniform draw on [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // Uniform index in [0, n), n >= 1. Multiply-shift keeps the bias below
    // 2^-64 without a rejection loop.
    std::size_t uniform_index(std::size_t n) {
        using u128 = unsigned __int128;
        return static_cast<std::size_t>((static_cast<u128>(next_u64()) * n) >> 64);
    }

  private:
    std::uint64_t seed_;
    std::uint64_t counter_ = 0;
};

// Stable seed derivation for independent sub-streams (per trial, per size).
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t a) {
    return detail::mix64(master + detail::kGolden + detail::mix64(a + detail::kGolden));
}

inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t a, std::uint64_t b) {
    return derive_seed(derive_seed(master, a), b);
}

}  // namespace tailfit
