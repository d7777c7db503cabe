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


#include "cpg/training.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numeric>
#include <sstream>

#include "cpg/decoding.hpp"
#include "cpg/error.hpp"
#include "cpg/evaluation.hpp"
#include "cpg/random.hpp"

namespace cpg {

const char* phase_name(Phase phase) noexcept {
  switch (phase) {
    case Phase::kMle:
      return "mle";
    case Phase::kRlMixed:
      return "rl-mixed";
    case Phase::kDs:
      return "ds";
  }
  return "?";
}

Phase parse_phase(const std::string& name) {
  if (name == "mle") return Phase::kMle;
  if (name == "rl-mixed") return Phase::kRlMixed;
  if (name == "ds") return Phase::kDs;
  fail(ErrorCategory::kConfig, "unknown phase '" + name + "' (expected mle, rl-mixed or ds)");
}

std::vector<PhaseSpan> parse_schedule(const std::string& text) {
  std::vector<PhaseSpan> out;
  std::istringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    const auto colon = item.find(':');
    if (colon == std::string::npos) fail(ErrorCategory::kConfig, "phase '" + item + "' needs the form name:iterations");
    PhaseSpan span;
    span.phase = parse_phase(item.substr(0, colon));
    const std::string count = item.substr(colon + 1);
    if (count.empty() || !std::all_of(count.begin(), count.end(), [](unsigned char c) { return std::isdigit(c); })) {
      fail(ErrorCategory::kConfig, "phase '" + item + "' has a bad iteration count");
    }
    span.iterations = std::stoull(count);
    out.push_back(span);
  }
  if (out.empty()) fail(ErrorCategory::kConfig, "empty phase schedule");
  if (out.front().phase != Phase::kMle) fail(ErrorCategory::kConfig, "phase schedule must start with mle");
  for (std::size_t i = 1; i < out.size(); ++i) {
    if (out[i].phase == Phase::kMle) fail(ErrorCategory::kConfig, "mle may only appear as the first phase");
  }
  return out;
}

void validate(const TrainingConfig& c) {
  auto require = [](bool ok, const std::string& msg) {
    if (!ok) fail(ErrorCategory::kConfig, msg);
  };
  require(c.lambda >= 0.0 && c.lambda <= 1.0, "lambda must lie in [0, 1]");
  require(c.pi > 0.0, "pi must be positive");
  require(c.learning_rate > 0.0, "learning rate must be positive");
  require(c.accumulator_init > 0.0, "accumulator init must be positive");
  require(c.clip_norm > 0.0, "clip norm must be positive");
  require(c.batch_size > 0, "batch size must be positive");
  require(c.max_decode_len > 0, "max decode length must be positive");
  require(!c.schedule.empty() && c.schedule.front().phase == Phase::kMle, "phase schedule must start with mle");
}

Var mle_loss(Tape& tape, const Model& model, const Example& example, std::mt19937_64* rng) {
  return ops::scale(model.sequence_log_prob(tape, example, example.target_ids, rng), -1.0);
}

double rouge_l_reward(std::span<const std::string> candidate, std::span<const std::string> reference) {
  if (candidate.empty()) return 0.0;
  const TokenSeq ref(reference.begin(), reference.end());
  return rouge_l(candidate, std::span<const TokenSeq>(&ref, 1)).f1;
}

double sequence_reward(std::span<const TokenId> ids, const Example& example, const RewardFn& reward) {
  TokenSeq words;
  for (TokenId id : ids) {
    if (id == kEosId) break;
    words.push_back(example.vocab.token(id));
  }
  if (words.empty()) return 0.0;
  return reward(words, example.encoded.reference_tokens);
}

RlLoss rl_loss(Tape& tape, const Model& model, const Example& example, const RewardFn& reward, std::mt19937_64& rng,
               std::size_t max_len) {
  RlLoss out;
  out.baseline = greedy_decode(model, example, max_len, &rng);
  out.baseline_reward = sequence_reward(out.baseline, example, reward);

  const EncoderOutput enc = model.encode(tape, example.encoded.source_ids);
  DecoderState state = enc.initial;
  TokenId prev = kSosId;
  for (std::size_t t = 0; t < max_len; ++t) {
    StepOutput s = model.step(tape, state, prev, enc, example, &rng);
    const Tensor& p = s.p_final.value();
    const auto w = static_cast<TokenId>(sample_index(p.data(), rng));
    Var lp = ops::log(ops::pick(s.p_final, static_cast<std::size_t>(w)));
    out.log_prob = out.log_prob.valid() ? ops::add(out.log_prob, lp) : lp;
    out.sample.push_back(w);
    if (w == kEosId) break;
    state = s.next;
    prev = w;
  }
  if (!out.log_prob.valid()) out.log_prob = tape.constant(Tensor::scalar(0.0));
  out.sample_reward = sequence_reward(out.sample, example, reward);
  out.loss = ops::scale(out.log_prob, out.baseline_reward - out.sample_reward);
  return out;
}

Var policy_loss(Tape& tape, const Model& model, const Example& example, std::span<const TokenId> tokens,
                double coefficient, std::mt19937_64* rng) {
  return ops::scale(model.sequence_log_prob(tape, example, tokens, rng), coefficient);
}

Var mixed_loss(Var rl, Var mle, double lambda) { return ops::add(ops::scale(rl, lambda), ops::scale(mle, 1.0 - lambda)); }

std::vector<double> ds_repr(std::span<const TokenId> ids, const Tensor& embedding) {
  if (embedding.rank() != 2) fail(ErrorCategory::kShape, "ds_repr: embedding must be a matrix");
  const std::size_t dim = embedding.cols();
  std::vector<double> sum(dim, 0.0);
  for (TokenId id : ids) {
    const auto row = static_cast<std::size_t>(id) < embedding.rows() ? static_cast<std::size_t>(id) : kUnkId;
    for (std::size_t d = 0; d < dim; ++d) sum[d] += embedding[row * dim + d];
  }
  const double mx = sum.empty() ? 0.0 : *std::max_element(sum.begin(), sum.end());
  double z = 0.0;
  for (double& v : sum) z += (v = std::exp(v - mx));
  for (double& v : sum) v /= z;
  return sum;
}

double kl_divergence(std::span<const double> p, std::span<const double> q) {
  if (p.size() != q.size()) fail(ErrorCategory::kShape, "kl_divergence: distributions differ in length");
  double kl = 0.0;
  for (std::size_t j = 0; j < p.size(); ++j) {
    if (p[j] > 0.0) kl += p[j] * std::log(p[j] / std::max(q[j], ops::kLogFloor));
  }
  return kl;
}

DsLabel ds_label(std::span<const double> summary_repr, std::span<const std::vector<double>> document_reprs, double pi,
                 bool binary, double threshold) {
  if (document_reprs.empty()) fail(ErrorCategory::kInvalidArgument, "ds_label: no test documents");
  DsLabel label;
  for (const auto& doc : document_reprs) label.mean_kl += kl_divergence(summary_repr, doc);
  label.mean_kl /= static_cast<double>(document_reprs.size());
  label.weight = binary ? (label.mean_kl <= threshold ? pi : 0.0) : std::clamp(pi - label.mean_kl, 0.0, pi);
  return label;
}

Var ds_loss(Var mle, const DsLabel& label) { return ops::scale(mle, label.weight); }

std::vector<DsLabel> label_corpus(std::span<const TokenSeq> references, std::span<const TokenSeq> test_documents,
                                  const Vocabulary& vocab, const Tensor& embedding, const TrainingConfig& config) {
  auto ids_of = [&vocab](const TokenSeq& tokens) {
    std::vector<TokenId> ids;
    ids.reserve(tokens.size());
    for (const std::string& t : tokens) ids.push_back(vocab.id(t));
    return ids;
  };
  std::vector<std::vector<double>> docs;
  docs.reserve(test_documents.size());
  for (const TokenSeq& d : test_documents) docs.push_back(ds_repr(ids_of(d), embedding));
  std::vector<DsLabel> out;
  out.reserve(references.size());
  for (const TokenSeq& r : references) {
    out.push_back(ds_label(ds_repr(ids_of(r), embedding), docs, config.pi, config.ds_binary, config.ds_threshold));
  }
  return out;
}

double clip_global_norm(TensorMap& gradients, double max_norm) {
  double sq = 0.0;
  for (const auto& [name, g] : gradients)
    for (double v : g.data()) sq += v * v;
  const double norm = std::sqrt(sq);
  if (norm <= max_norm) return 1.0;
  const double factor = max_norm / norm;
  for (auto& [name, g] : gradients)
    for (double& v : g.data()) v *= factor;
  return factor;
}

Adagrad::Adagrad(const ParameterStore& params, double learning_rate, double accumulator_init, double clip_norm)
    : learning_rate_(learning_rate), clip_norm_(clip_norm) {
  for (const auto& [name, t] : params.tensors()) {
    Tensor acc(t.shape());
    acc.fill(accumulator_init);
    accumulators_.emplace(name, std::move(acc));
  }
}

void Adagrad::step(ParameterStore& params, TensorMap gradients) {
  for (const auto& [name, g] : gradients) {
    if (!params.contains(name)) fail(ErrorCategory::kInvalidArgument, "gradient for unknown parameter '" + name + "'");
    if (g.shape() != params.get(name).shape()) {
      fail(ErrorCategory::kShape, "gradient for '" + name + "' has shape " + shape_string(g.shape()));
    }
    if (!g.all_finite()) fail(ErrorCategory::kNumeric, "non-finite gradient for '" + name + "'");
  }
  last_clip_ = clip_global_norm(gradients, clip_norm_);
  for (const auto& [name, g] : gradients) {
    Tensor& p = params.get(name);
    Tensor& acc = accumulators_.at(name);
    for (std::size_t i = 0; i < g.size(); ++i) {
      acc[i] += g[i] * g[i];
      p[i] -= learning_rate_ * g[i] / std::sqrt(acc[i]);
    }
  }
}

Trainer::Trainer(Model& model, TrainingConfig config)
    : model_(model),
      config_(std::move(config)),
      optimizer_(model.params(), config_.learning_rate, config_.accumulator_init, config_.clip_norm) {
  validate(config_);
}

std::size_t Trainer::total_iterations() const noexcept {
  std::size_t n = 0;
  for (const PhaseSpan& s : config_.schedule) n += s.iterations;
  return n;
}

Phase Trainer::phase_at(std::size_t iteration) const {
  std::size_t end = 0;
  for (const PhaseSpan& s : config_.schedule) {
    end += s.iterations;
    if (iteration < end) return s.phase;
  }
  fail(ErrorCategory::kInvalidArgument, "iteration " + std::to_string(iteration) + " is past the schedule");
}

std::vector<std::size_t> Trainer::batch_for(std::size_t corpus_size, std::size_t iteration) {
  std::vector<std::size_t> batch;
  batch.reserve(config_.batch_size);
  for (std::size_t j = 0; j < config_.batch_size; ++j) {
    const std::size_t pos = iteration * config_.batch_size + j;
    const std::size_t epoch = pos / corpus_size;
    if (epoch != cached_epoch_) {
      cached_order_.resize(corpus_size);
      std::iota(cached_order_.begin(), cached_order_.end(), std::size_t{0});
      if (config_.shuffle) {
        std::mt19937_64 rng(mix_seed(config_.seed ^ 0x5eedf00dULL, epoch));
        shuffle(cached_order_.begin(), cached_order_.end(), rng);
      }
      cached_epoch_ = epoch;
    }
    batch.push_back(cached_order_[pos % corpus_size]);
  }
  return batch;
}

double Trainer::step(std::span<const Example> corpus, std::span<const std::size_t> batch, Phase phase,
                     std::mt19937_64& rng) {
  if (batch.empty()) fail(ErrorCategory::kInvalidArgument, "empty batch");
  if (phase == Phase::kDs && ds_labels_.size() != corpus.size()) {
    fail(ErrorCategory::kMismatch, "ds phase needs one label per pair: " + std::to_string(ds_labels_.size()) +
                                       " labels for " + std::to_string(corpus.size()) + " pairs");
  }
  const RewardFn reward = rouge_l_reward;
  TensorMap gradients;
  double loss_sum = 0.0;
  for (std::size_t idx : batch) {
    if (idx >= corpus.size()) fail(ErrorCategory::kInvalidArgument, "batch index out of range");
    const Example& ex = corpus[idx];
    if (phase == Phase::kDs && ds_labels_[idx].weight == 0.0) continue;
    Tape tape;
    Var loss;
    switch (phase) {
      case Phase::kMle:
        loss = mle_loss(tape, model_, ex, &rng);
        break;
      case Phase::kRlMixed: {
        const RlLoss rl = rl_loss(tape, model_, ex, reward, rng, config_.max_decode_len);
        loss = mixed_loss(rl.loss, mle_loss(tape, model_, ex, &rng), config_.lambda);
        break;
      }
      case Phase::kDs:
        loss = ds_loss(mle_loss(tape, model_, ex, &rng), ds_labels_[idx]);
        break;
    }
    if (!std::isfinite(loss.item())) fail(ErrorCategory::kNumeric, "non-finite loss on pair " + std::to_string(idx));
    tape.backward(loss);
    tape.accumulate_parameter_gradients(gradients);
    loss_sum += loss.item();
  }
  optimizer_.step(model_.params(), std::move(gradients));
  return loss_sum / static_cast<double>(batch.size());
}

void Trainer::run(std::span<const Example> corpus, const std::function<void(const IterationRecord&)>& on_iteration) {
  if (corpus.empty()) fail(ErrorCategory::kInvalidArgument, "training corpus is empty");
  const std::size_t total = total_iterations();
  while (iteration_ < total) {
    const Phase phase = phase_at(iteration_);
    if (phase == Phase::kDs && ds_labels_.empty()) {
      if (!labeler_) fail(ErrorCategory::kConfig, "ds phase reached without distant-supervision labels");
      ds_labels_ = labeler_(model_);
    }
    const std::vector<std::size_t> batch = batch_for(corpus.size(), iteration_);
    std::mt19937_64 rng(mix_seed(config_.seed, iteration_));
    const double loss = step(corpus, batch, phase, rng);
    ++iteration_;
    if (on_iteration) on_iteration({iteration_, phase, loss});
  }
}

double corpus_token_nll(const Model& model, std::span<const Example> corpus) {
  double nll = 0.0;
  std::size_t tokens = 0;
  std::mt19937_64 rng(0);
  for (const Example& ex : corpus) {
    Tape tape(Tape::Mode::kInference);
    nll -= model.sequence_log_prob(tape, ex, ex.target_ids, &rng).item();
    tokens += ex.target_ids.size();
  }
  return tokens ? nll / static_cast<double>(tokens) : 0.0;
}

}  // namespace cpg
