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

// Attention encoder-decoder with a copy pointer and a concept pointer.
//
// Encoder: stacked bidirectional LSTM; position i is represented by the
// concatenated forward/backward states of the top layer. Decoder: a single
// LSTM fed the previous token's embedding. At each step the decoder state
// attends over the source, the context vector drives a two-layer vocabulary
// softmax, and a sigmoid gate splits mass between generating and pointing.
// Pointing mass goes to the source token itself (copy) and, scaled by the
// selected conceptualized probability, to one concept candidate of that
// position. The mixture is renormalized over the example's extended vocabulary
// whenever concept mass is present.

#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "cpg/autodiff.hpp"
#include "cpg/concepts.hpp"
#include "cpg/corpus.hpp"
#include "cpg/tensor.hpp"

namespace cpg {

enum class SelectionMode { kArgmax, kRandom };

const char* selection_name(SelectionMode mode) noexcept;
SelectionMode parse_selection(const std::string& name);

struct ModelConfig {
  std::size_t vocab_size = 0;
  std::size_t embedding_dim = 128;
  std::size_t hidden_dim = 256;
  std::size_t encoder_layers = 2;
  std::size_t concept_k = 3;
  double gamma = 0.1;
  SelectionMode selection = SelectionMode::kArgmax;
  // False gives the plain pointer-generator: no concept term at all.
  bool use_concepts = true;
  double init_scale = 0.1;

  friend bool operator==(const ModelConfig&, const ModelConfig&) = default;
};

struct DecoderState {
  Var h;
  Var c;
};

struct EncoderOutput {
  std::vector<Var> states;  // h_i, width 2 * hidden
  std::vector<Var> keys;    // W_h h_i + b, reused by every decoder step
  DecoderState initial;     // bridged decoder start state
};

struct Attention {
  Var weights;  // alpha_t over positions
  Var context;  // h*_t
};

// Pointer mass routed to the concept selected at one source position.
struct ConceptMass {
  std::size_t position = 0;
  TokenId token = kUnkId;
  Var value;  // selected conceptualized probability (scalar)
};

struct StepOutput {
  DecoderState next;
  Var state;    // s_t
  Attention attention;
  Var p_vocab;  // over the base vocabulary
  Var p_gen;
  std::vector<Var> beta;           // per position; invalid where no candidates
  std::vector<Var> concept_probs;  // per position; invalid where no candidates
  std::vector<int> selected;       // per position; -1 where no candidates
  Var p_final;                     // over the extended vocabulary
};

class Model {
 public:
  explicit Model(ModelConfig config);

  // Uniform(-init_scale, init_scale) for every parameter.
  void initialize(std::uint64_t seed);

  const ModelConfig& config() const noexcept { return config_; }
  ParameterStore& params() noexcept { return params_; }
  const ParameterStore& params() const noexcept { return params_; }

  // Source ids may be extended; out-of-base ids read the UNK embedding.
  EncoderOutput encode(Tape& tape, std::span<const TokenId> source_ids) const;

  Attention attention(Tape& tape, Var state, const EncoderOutput& enc) const;
  Var vocab_distribution(Tape& tape, Var state, Var context) const;
  Var generation_gate(Tape& tape, Var context, Var state, Var prev_embedding) const;
  // Softmax over candidates of W_c [h_i, h*_t, c_j].
  Var concept_weights(Tape& tape, Var source_state, Var context, std::span<const Var> concept_embeddings) const;

  Var embed(Tape& tape, TokenId base_id) const;

  // One decoder step. `rng` is required in random selection mode.
  StepOutput step(Tape& tape, const DecoderState& prev, TokenId prev_token, const EncoderOutput& enc,
                  const Example& example, std::mt19937_64* rng) const;

  // Sum over t of log P_final(tokens[t]) under teacher forcing from SOS.
  Var sequence_log_prob(Tape& tape, const Example& example, std::span<const TokenId> tokens,
                        std::mt19937_64* rng) const;

 private:
  Var p(Tape& tape, const std::string& name) const { return tape.param(name, params_.get(name)); }
  DecoderState lstm(Tape& tape, const std::string& prefix, Var input, const DecoderState& prev) const;

  ModelConfig config_;
  ParameterStore params_;
};

// P^c_j = prior_j + gamma * beta_j.
Var conceptualized_prob(Var beta, std::span<const double> priors, double gamma);

// Index of the candidate to route concept mass to. Argmax takes the largest
// beta (lowest index on ties); random draws j with probability proportional
// to concept_probs[j].
std::size_t select_concept(SelectionMode mode, std::span<const double> beta, std::span<const double> concept_probs,
                           std::mt19937_64* rng);

// p_gen * P_vocab(w) + (1 - p_gen) * (sum_{i: x_i = w} alpha_i + sum_{c_i = w} alpha_i * P^_i),
// renormalized when any concept mass is present.
Var final_distribution(Var p_gen, Var p_vocab, Var alpha, std::span<const TokenId> source_ids,
                       std::span<const ConceptMass> concepts, std::size_t extended_size);

}  // namespace cpg
