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

#include "cpg/decoding.hpp"

#include <algorithm>
#include <cmath>

#include "cpg/error.hpp"

namespace cpg {

double Hypothesis::score() const noexcept {
  return tokens.empty() ? 0.0 : log_prob / static_cast<double>(tokens.size());
}

std::vector<TokenId> Hypothesis::summary() const {
  std::vector<TokenId> out = tokens;
  if (!out.empty() && out.back() == kEosId) out.pop_back();
  return out;
}

bool emittable(TokenId id) noexcept { return id != kPadId && id != kSosId; }

std::vector<TokenId> greedy_decode(const Model& model, const Example& example, std::size_t max_len, std::mt19937_64* rng) {
  Tape tape(Tape::Mode::kInference);
  const EncoderOutput enc = model.encode(tape, example.encoded.source_ids);
  DecoderState state = enc.initial;
  TokenId prev = kSosId;
  std::vector<TokenId> out;
  for (std::size_t t = 0; t < max_len; ++t) {
    const StepOutput s = model.step(tape, state, prev, enc, example, rng);
    const Tensor& p = s.p_final.value();
    TokenId best = kEosId;
    double best_p = -1.0;
    for (std::size_t w = 0; w < p.size(); ++w) {
      const auto id = static_cast<TokenId>(w);
      if (emittable(id) && p[w] > best_p) {
        best_p = p[w];
        best = id;
      }
    }
    if (best == kEosId) break;
    out.push_back(best);
    state = s.next;
    prev = best;
  }
  return out;
}

Hypothesis beam_search(const Model& model, const Example& example, std::size_t beam, std::size_t max_len,
                       std::mt19937_64* rng) {
  if (beam == 0) fail(ErrorCategory::kInvalidArgument, "beam_search: beam must be at least 1");
  if (max_len == 0) return Hypothesis{{}, 0.0, true};

  struct Live {
    Hypothesis hyp;
    DecoderState state;
  };
  struct Candidate {
    std::size_t parent;
    TokenId token;
    double log_prob;
  };

  Tape tape(Tape::Mode::kInference);
  const EncoderOutput enc = model.encode(tape, example.encoded.source_ids);
  std::vector<Live> alive{{Hypothesis{}, enc.initial}};
  std::vector<Hypothesis> finished;

  for (std::size_t t = 0; t < max_len && !alive.empty(); ++t) {
    std::vector<Candidate> candidates;
    std::vector<DecoderState> next_states;
    for (std::size_t h = 0; h < alive.size(); ++h) {
      const TokenId prev = alive[h].hyp.tokens.empty() ? kSosId : alive[h].hyp.tokens.back();
      const StepOutput s = model.step(tape, alive[h].state, prev, enc, example, rng);
      next_states.push_back(s.next);
      const Tensor& p = s.p_final.value();
      for (std::size_t w = 0; w < p.size(); ++w) {
        const auto id = static_cast<TokenId>(w);
        if (!emittable(id) || !(p[w] > 0.0)) continue;
        candidates.push_back({h, id, alive[h].hyp.log_prob + std::log(p[w])});
      }
    }
    const std::size_t keep = std::min(beam, candidates.size());
    std::partial_sort(candidates.begin(), candidates.begin() + static_cast<std::ptrdiff_t>(keep), candidates.end(),
                      [](const Candidate& a, const Candidate& b) {
                        if (a.log_prob != b.log_prob) return a.log_prob > b.log_prob;
                        if (a.parent != b.parent) return a.parent < b.parent;
                        return a.token < b.token;
                      });
    std::vector<Live> next;
    for (std::size_t c = 0; c < keep; ++c) {
      const Candidate& cand = candidates[c];
      Hypothesis hyp = alive[cand.parent].hyp;
      hyp.tokens.push_back(cand.token);
      hyp.log_prob = cand.log_prob;
      if (cand.token == kEosId || t + 1 == max_len) {
        hyp.finished = true;
        finished.push_back(std::move(hyp));
      } else {
        next.push_back({std::move(hyp), next_states[cand.parent]});
      }
    }
    alive = std::move(next);
    if (finished.size() >= beam) break;
  }
  if (finished.empty()) fail(ErrorCategory::kNumeric, "beam_search: no hypothesis with non-zero probability");
  auto best = std::max_element(finished.begin(), finished.end(),
                               [](const Hypothesis& a, const Hypothesis& b) { return a.score() < b.score(); });
  return *best;
}

std::string detokenize(std::span<const TokenId> ids, const ExtendedVocab& vocab) {
  std::string out;
  for (TokenId id : ids) {
    std::string tok = vocab.token(id);
    if (vocab.is_concept(id)) std::replace(tok.begin(), tok.end(), '_', ' ');
    if (!out.empty()) out += ' ';
    out += tok;
  }
  return out;
}

}  // namespace cpg
