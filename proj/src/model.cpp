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

#include "cpg/model.hpp"

#include <algorithm>

#include "cpg/error.hpp"
#include "cpg/random.hpp"

namespace cpg {

const char* selection_name(SelectionMode mode) noexcept {
  return mode == SelectionMode::kArgmax ? "argmax" : "random";
}

SelectionMode parse_selection(const std::string& name) {
  if (name == "argmax") return SelectionMode::kArgmax;
  if (name == "random") return SelectionMode::kRandom;
  fail(ErrorCategory::kConfig, "selection mode must be 'argmax' or 'random', got '" + name + "'");
}

namespace {

std::string layer_prefix(std::size_t layer, bool forward) {
  return "enc.l" + std::to_string(layer) + (forward ? ".fw" : ".bw");
}

void add_lstm(ParameterStore& ps, const std::string& prefix, std::size_t input, std::size_t hidden) {
  ps.add(prefix + ".W", {4 * hidden, input});
  ps.add(prefix + ".U", {4 * hidden, hidden});
  ps.add(prefix + ".b", {4 * hidden});
}

}  // namespace

Model::Model(ModelConfig config) : config_(config) {
  const std::size_t V = config_.vocab_size, E = config_.embedding_dim, H = config_.hidden_dim;
  if (V < kReservedTokens || E == 0 || H == 0 || config_.encoder_layers == 0) {
    fail(ErrorCategory::kConfig, "model: vocabulary, embedding, hidden and layer sizes must be positive");
  }
  if (config_.gamma < 0.0) fail(ErrorCategory::kConfig, "model: gamma must be non-negative");
  if (config_.concept_k == 0) fail(ErrorCategory::kConfig, "model: k must be at least 1");

  params_.add("embedding", {V, E});
  for (std::size_t l = 0; l < config_.encoder_layers; ++l) {
    const std::size_t in = l == 0 ? E : 2 * H;
    add_lstm(params_, layer_prefix(l, true), in, H);
    add_lstm(params_, layer_prefix(l, false), in, H);
  }
  params_.add("bridge.h.W", {H, 2 * H});
  params_.add("bridge.h.b", {H});
  params_.add("bridge.c.W", {H, 2 * H});
  params_.add("bridge.c.b", {H});
  add_lstm(params_, "dec", E, H);
  params_.add("attn.W_h", {H, 2 * H});
  params_.add("attn.W_s", {H, H});
  params_.add("attn.b", {H});
  params_.add("attn.v", {H});
  params_.add("out.W1", {H, 3 * H});
  params_.add("out.b1", {H});
  params_.add("out.W2", {V, H});
  params_.add("out.b2", {V});
  params_.add("gen.w_context", {2 * H});
  params_.add("gen.w_state", {H});
  params_.add("gen.w_input", {E});
  params_.add("gen.b", {});
  params_.add("concept.w", {4 * H + E});
}

void Model::initialize(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  for (auto& [_, t] : params_.tensors())
    for (double& v : t.data()) v = uniform(rng, -config_.init_scale, config_.init_scale);
}

Var Model::embed(Tape& tape, TokenId base_id) const {
  return ops::row(p(tape, "embedding"), static_cast<std::size_t>(base_id));
}

DecoderState Model::lstm(Tape& tape, const std::string& prefix, Var input, const DecoderState& prev) const {
  const std::size_t H = config_.hidden_dim;
  Var gates = ops::add(ops::add(ops::matmul(p(tape, prefix + ".W"), input), ops::matmul(p(tape, prefix + ".U"), prev.h)),
                       p(tape, prefix + ".b"));
  Var i = ops::sigmoid(ops::slice(gates, 0, H));
  Var f = ops::sigmoid(ops::slice(gates, H, H));
  Var o = ops::sigmoid(ops::slice(gates, 2 * H, H));
  Var g = ops::tanh(ops::slice(gates, 3 * H, H));
  Var c = ops::add(ops::mul(f, prev.c), ops::mul(i, g));
  Var h = ops::mul(o, ops::tanh(c));
  return {h, c};
}

EncoderOutput Model::encode(Tape& tape, std::span<const TokenId> source_ids) const {
  if (source_ids.empty()) fail(ErrorCategory::kInvalidArgument, "encode: empty source");
  const std::size_t n = source_ids.size(), H = config_.hidden_dim;
  const Var zero = tape.constant(Tensor(Shape{H}));

  std::vector<Var> inputs(n);
  for (std::size_t i = 0; i < n; ++i) {
    const TokenId id = source_ids[i];
    inputs[i] = embed(tape, id >= 0 && static_cast<std::size_t>(id) < config_.vocab_size ? id : kUnkId);
  }

  DecoderState fw_last, bw_first;
  for (std::size_t l = 0; l < config_.encoder_layers; ++l) {
    std::vector<DecoderState> fw(n), bw(n);
    DecoderState st{zero, zero};
    for (std::size_t i = 0; i < n; ++i) fw[i] = st = lstm(tape, layer_prefix(l, true), inputs[i], st);
    st = {zero, zero};
    for (std::size_t i = n; i-- > 0;) bw[i] = st = lstm(tape, layer_prefix(l, false), inputs[i], st);
    for (std::size_t i = 0; i < n; ++i) inputs[i] = ops::concat({fw[i].h, bw[i].h});
    fw_last = fw[n - 1];
    bw_first = bw[0];
  }

  EncoderOutput out;
  out.states = std::move(inputs);
  const Var W_h = p(tape, "attn.W_h"), b = p(tape, "attn.b");
  for (const Var& h : out.states) out.keys.push_back(ops::add(ops::matmul(W_h, h), b));
  out.initial.h = ops::add(ops::matmul(p(tape, "bridge.h.W"), ops::concat({fw_last.h, bw_first.h})), p(tape, "bridge.h.b"));
  out.initial.c = ops::add(ops::matmul(p(tape, "bridge.c.W"), ops::concat({fw_last.c, bw_first.c})), p(tape, "bridge.c.b"));
  return out;
}

Attention Model::attention(Tape& tape, Var state, const EncoderOutput& enc) const {
  const Var query = ops::matmul(p(tape, "attn.W_s"), state);
  const Var v = p(tape, "attn.v");
  std::vector<Var> scores;
  scores.reserve(enc.keys.size());
  for (const Var& key : enc.keys) scores.push_back(ops::dot(v, ops::tanh(ops::add(key, query))));
  Attention out;
  out.weights = ops::softmax(ops::concat(scores));
  Var context;
  for (std::size_t i = 0; i < enc.states.size(); ++i) {
    Var term = ops::mul_scalar(enc.states[i], ops::pick(out.weights, i));
    context = context.valid() ? ops::add(context, term) : term;
  }
  out.context = context;
  return out;
}

Var Model::vocab_distribution(Tape& tape, Var state, Var context) const {
  Var hidden = ops::add(ops::matmul(p(tape, "out.W1"), ops::concat({state, context})), p(tape, "out.b1"));
  return ops::softmax(ops::add(ops::matmul(p(tape, "out.W2"), hidden), p(tape, "out.b2")));
}

Var Model::generation_gate(Tape& tape, Var context, Var state, Var prev_embedding) const {
  Var logit = ops::add(ops::add(ops::dot(p(tape, "gen.w_context"), context), ops::dot(p(tape, "gen.w_state"), state)),
                       ops::dot(p(tape, "gen.w_input"), prev_embedding));
  return ops::sigmoid(ops::add(logit, p(tape, "gen.b")));
}

Var Model::concept_weights(Tape& tape, Var source_state, Var context, std::span<const Var> concept_embeddings) const {
  if (concept_embeddings.empty()) fail(ErrorCategory::kInvalidArgument, "concept_weights: empty candidate set");
  const Var w = p(tape, "concept.w");
  std::vector<Var> logits;
  logits.reserve(concept_embeddings.size());
  for (const Var& c : concept_embeddings) logits.push_back(ops::dot(w, ops::concat({source_state, context, c})));
  return ops::softmax(ops::concat(logits));
}

StepOutput Model::step(Tape& tape, const DecoderState& prev, TokenId prev_token, const EncoderOutput& enc,
                       const Example& example, std::mt19937_64* rng) const {
  const std::size_t n = enc.states.size();
  if (example.encoded.source_ids.size() != n) {
    fail(ErrorCategory::kMismatch, "step: encoder output does not match the example source");
  }
  StepOutput out;
  const Var input = embed(tape, example.vocab.input_id(prev_token));
  out.next = lstm(tape, "dec", input, prev);
  out.state = out.next.h;
  out.attention = attention(tape, out.state, enc);
  out.p_vocab = vocab_distribution(tape, out.state, out.attention.context);
  out.p_gen = generation_gate(tape, out.attention.context, out.state, input);

  out.beta.resize(n);
  out.concept_probs.resize(n);
  out.selected.assign(n, -1);
  std::vector<ConceptMass> masses;
  if (config_.use_concepts) {
    for (std::size_t i = 0; i < n && i < example.concepts.positions.size(); ++i) {
      const auto& cands = example.concepts.positions[i];
      if (cands.empty()) continue;
      std::vector<Var> embs;
      std::vector<double> priors;
      for (const ConceptCandidate& c : cands) {
        embs.push_back(embed(tape, example.vocab.input_id(c.id)));
        priors.push_back(c.prior);
      }
      out.beta[i] = concept_weights(tape, enc.states[i], out.attention.context, embs);
      out.concept_probs[i] = conceptualized_prob(out.beta[i], priors, config_.gamma);
      const std::size_t sel = select_concept(config_.selection, out.beta[i].value().data(),
                                             out.concept_probs[i].value().data(), rng);
      out.selected[i] = static_cast<int>(sel);
      masses.push_back({i, cands[sel].id, ops::pick(out.concept_probs[i], sel)});
    }
  }
  out.p_final = final_distribution(out.p_gen, out.p_vocab, out.attention.weights, example.encoded.source_ids, masses,
                                   example.vocab.size());
  return out;
}

Var Model::sequence_log_prob(Tape& tape, const Example& example, std::span<const TokenId> tokens,
                             std::mt19937_64* rng) const {
  const EncoderOutput enc = encode(tape, example.encoded.source_ids);
  DecoderState state = enc.initial;
  TokenId prev = kSosId;
  Var total;
  for (TokenId y : tokens) {
    StepOutput s = step(tape, state, prev, enc, example, rng);
    Var lp = ops::log(ops::pick(s.p_final, static_cast<std::size_t>(y)));
    total = total.valid() ? ops::add(total, lp) : lp;
    state = s.next;
    prev = y;
  }
  if (!total.valid()) total = tape.constant(Tensor::scalar(0.0));
  return total;
}

Var conceptualized_prob(Var beta, std::span<const double> priors, double gamma) {
  if (priors.size() != beta.size()) fail(ErrorCategory::kShape, "conceptualized_prob: priors and beta differ in length");
  const Var prior = beta.tape().constant(Tensor::vector({priors.begin(), priors.end()}));
  return ops::add(prior, ops::scale(beta, gamma));
}

std::size_t select_concept(SelectionMode mode, std::span<const double> beta, std::span<const double> concept_probs,
                           std::mt19937_64* rng) {
  if (beta.empty()) fail(ErrorCategory::kInvalidArgument, "select_concept: empty candidate set");
  if (mode == SelectionMode::kArgmax) {
    return static_cast<std::size_t>(std::max_element(beta.begin(), beta.end()) - beta.begin());
  }
  if (!rng) fail(ErrorCategory::kInvalidArgument, "select_concept: random mode needs a generator");
  return sample_index(concept_probs, *rng);
}

Var final_distribution(Var p_gen, Var p_vocab, Var alpha, std::span<const TokenId> source_ids,
                       std::span<const ConceptMass> concepts, std::size_t extended_size) {
  if (alpha.size() != source_ids.size()) {
    fail(ErrorCategory::kShape, "final_distribution: attention has " + std::to_string(alpha.size()) + " positions, source has " +
                                    std::to_string(source_ids.size()));
  }
  std::vector<std::size_t> copy_idx(source_ids.begin(), source_ids.end());
  Var pointer = ops::scatter_add(alpha, copy_idx, extended_size);
  if (!concepts.empty()) {
    std::vector<Var> values;
    std::vector<std::size_t> idx;
    for (const ConceptMass& m : concepts) {
      values.push_back(ops::mul(ops::pick(alpha, m.position), m.value));
      idx.push_back(static_cast<std::size_t>(m.token));
    }
    pointer = ops::add(pointer, ops::scatter_add(ops::concat(values), idx, extended_size));
  }
  Var mass = ops::add(ops::mul_scalar(ops::pad(p_vocab, extended_size), p_gen), ops::mul_scalar(pointer, ops::one_minus(p_gen)));
  if (concepts.empty()) return mass;
  return ops::div_scalar(mass, ops::sum(mass));
}

}  // namespace cpg
