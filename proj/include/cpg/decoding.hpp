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
#include <random>
#include <span>
#include <string>
#include <vector>

#include "cpg/concepts.hpp"
#include "cpg/model.hpp"

namespace cpg {

inline constexpr std::size_t kDefaultMaxDecodeLength = 30;
inline constexpr std::size_t kDefaultBeamSize = 8;

struct Hypothesis {
  std::vector<TokenId> tokens;  // includes the final EOS when finished by EOS
  double log_prob = 0.0;
  bool finished = false;

  // Mean log probability per emitted token.
  double score() const noexcept;
  // Tokens without the trailing EOS.
  std::vector<TokenId> summary() const;
};

// PAD and SOS are never emitted by either decoder.
bool emittable(TokenId id) noexcept;

// Argmax of P_final at each step (lowest id on ties) until EOS or max_len.
// Returned tokens exclude EOS. `rng` is needed only in random selection mode.
std::vector<TokenId> greedy_decode(const Model& model, const Example& example, std::size_t max_len = kDefaultMaxDecodeLength,
                                   std::mt19937_64* rng = nullptr);

// Expands every live hypothesis over the extended vocabulary, keeps the top
// `beam` candidates by accumulated log probability, and moves those ending in
// EOS (or reaching max_len) to the finished pool. Stops once `beam`
// hypotheses have finished. Returns the finished hypothesis with the best
// length-normalized score.
Hypothesis beam_search(const Model& model, const Example& example, std::size_t beam = kDefaultBeamSize,
                       std::size_t max_len = kDefaultMaxDecodeLength, std::mt19937_64* rng = nullptr);

// Space-joined tokens; concept tokens have underscores turned back into spaces.
std::string detokenize(std::span<const TokenId> ids, const ExtendedVocab& vocab);

}  // namespace cpg
