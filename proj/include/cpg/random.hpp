// Copyright 2026 The cpg Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>

namespace cpg {

// Bit-level conversions so that seeded runs reproduce across standard
// libraries (std distributions are implementation-defined).
inline double uniform01(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

inline double uniform(std::mt19937_64& rng, double lo, double hi) { return lo + (hi - lo) * uniform01(rng); }

// Index drawn with probability weights[i] / sum(weights). Weights must be
// non-negative with a positive sum.
std::size_t sample_index(std::span<const double> weights, std::mt19937_64& rng);

// Fisher-Yates with uniform01, deterministic for a given generator state.
template <typename It>
void shuffle(It first, It last, std::mt19937_64& rng) {
  for (auto n = last - first; n > 1; --n) {
    const auto j = static_cast<decltype(n)>(uniform01(rng) * static_cast<double>(n));
    std::swap(first[n - 1], first[j < n ? j : n - 1]);
  }
}

// Derives an independent stream from a base seed and a counter.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t counter) noexcept;

}  // namespace cpg
