// Copyright 2026 The EQV Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <iterator>
#include <random>
#include <utility>

namespace eqv {

/// splitmix64 finalizer. Used to turn structured keys into well-mixed seeds.
constexpr std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

/// Derives an independent substream seed from a master seed and a key path,
/// e.g. derive_seed(master, {machine, sample, shot}). Order of keys matters.
constexpr std::uint64_t derive_seed(std::uint64_t master, std::initializer_list<std::uint64_t> keys) {
    std::uint64_t h = splitmix64(master);
    for (std::uint64_t k : keys) {
        h = splitmix64(h ^ splitmix64(k + 0x632BE59BD9B4E019ULL));
    }
    return h;
}

/// Seeded random stream. Conversions from engine output are done here rather
/// than through <random> distributions, whose algorithms are
/// implementation-defined, so results are identical across standard libraries.
class Rng {
   public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    /// Uniform double in [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    /// Uniform integer in [0, n). n must be positive.
    std::uint64_t below(std::uint64_t n) {
        const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
        std::uint64_t x = engine_();
        while (x >= limit) x = engine_();
        return x % n;
    }

    /// True with probability p.
    bool bernoulli(double p) { return uniform() < p; }

    /// Fisher-Yates shuffle of a random-access range.
    template <class Range>
    void shuffle(Range& r) {
        const std::size_t n = std::size(r);
        for (std::size_t i = n; i > 1; --i) {
            const std::size_t j = static_cast<std::size_t>(below(i));
            std::swap(r[i - 1], r[j]);
        }
    }

   private:
    std::mt19937_64 engine_;
};

}  // namespace eqv
