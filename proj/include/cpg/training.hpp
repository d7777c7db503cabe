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
#include <functional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "cpg/autodiff.hpp"
#include "cpg/concepts.hpp"
#include "cpg/model.hpp"
#include "cpg/tensor.hpp"

namespace cpg {

enum class Phase { kMle, kRlMixed, kDs };

const char* phase_name(Phase phase) noexcept;
Phase parse_phase(const std::string& name);

struct PhaseSpan {
  Phase phase = Phase::kMle;
  std::size_t iterations = 0;

  friend bool operator==(const PhaseSpan&, const PhaseSpan&) = default;
};

// "mle:1000,rl-mixed:200". Must open with mle; later spans are rl-mixed or ds.
std::vector<PhaseSpan> parse_schedule(const std::string& text);

struct TrainingConfig {
  double lambda = 0.99;
  double pi = 1.68;
  double learning_rate = 0.15;
  double accumulator_init = 0.1;
  double clip_norm = 2.0;
  std::size_t batch_size = 64;
  std::size_t max_decode_len = 30;
  std::uint64_t seed = 1;
  bool shuffle = true;
  // Hard relevant/irrelevant labels: weight pi when mean KL <= threshold, else 0.
  bool ds_binary = false;
  double ds_threshold = 0.0;
  std::vector<PhaseSpan> schedule{{Phase::kMle, 1000}};
};

void validate(const TrainingConfig& config);

// -sum_t log P_final(y*_t), teacher forced.
Var mle_loss(Tape& tape, const Model& model, const Example& example, std::mt19937_64* rng = nullptr);

// Reward of a generated token sequence against the reference tokens.
using RewardFn = std::function<double(std::span<const std::string> candidate, std::span<const std::string> reference)>;

// ROUGE-L F1; an empty candidate scores 0.
double rouge_l_reward(std::span<const std::string> candidate, std::span<const std::string> reference);

struct RlLoss {
  Var loss;      // (r(baseline) - r(sample)) * log P(sample)
  Var log_prob;  // sum_t log P(sample_t | ...)
  std::vector<TokenId> sample;    // includes EOS when sampled
  std::vector<TokenId> baseline;  // greedy, without EOS
  double sample_reward = 0.0;
  double baseline_reward = 0.0;
};

// Samples y^s from P_final step by step (up to max_len, stopping at EOS) and
// scores it against the greedy baseline. Only log P(y^s) carries gradient.
RlLoss rl_loss(Tape& tape, const Model& model, const Example& example, const RewardFn& reward, std::mt19937_64& rng,
               std::size_t max_len);

// coefficient * sum_t log P(tokens_t); the policy-gradient surrogate for a
// fixed sample.
Var policy_loss(Tape& tape, const Model& model, const Example& example, std::span<const TokenId> tokens,
                double coefficient, std::mt19937_64* rng = nullptr);

// Reward of a token-id sequence (EOS and anything after it dropped).
double sequence_reward(std::span<const TokenId> ids, const Example& example, const RewardFn& reward);

// lambda * rl + (1 - lambda) * mle
Var mixed_loss(Var rl, Var mle, double lambda);

// softmax(sum of the embedding rows of `ids`) over embedding dimensions.
std::vector<double> ds_repr(std::span<const TokenId> ids, const Tensor& embedding);

// sum_j p_j log(p_j / q_j)
double kl_divergence(std::span<const double> p, std::span<const double> q);

struct DsLabel {
  double mean_kl = 0.0;
  double weight = 0.0;
};

// Mean KL(summary || document) over the test documents; weight is
// clamp(pi - meanKL, 0, pi), or the hard label when `binary` is set.
DsLabel ds_label(std::span<const double> summary_repr, std::span<const std::vector<double>> document_reprs, double pi,
                 bool binary = false, double threshold = 0.0);

// weight * mle
Var ds_loss(Var mle, const DsLabel& label);

// Labels every training pair against the test documents with the current
// embeddings. Tokens are mapped through `vocab`; unknown words use UNK.
std::vector<DsLabel> label_corpus(std::span<const TokenSeq> references, std::span<const TokenSeq> test_documents,
                                  const Vocabulary& vocab, const Tensor& embedding, const TrainingConfig& config);

// Scales gradients in place so their global L2 norm is at most max_norm.
// Returns the factor applied (1 when no clipping happened).
double clip_global_norm(TensorMap& gradients, double max_norm);

class Adagrad {
 public:
  Adagrad(const ParameterStore& params, double learning_rate, double accumulator_init, double clip_norm);

  // Clips, then acc += g^2 and p -= lr * g / sqrt(acc). Throws kNumeric on a
  // non-finite gradient before touching any state.
  void step(ParameterStore& params, TensorMap gradients);

  TensorMap& accumulators() noexcept { return accumulators_; }
  const TensorMap& accumulators() const noexcept { return accumulators_; }
  double last_clip_factor() const noexcept { return last_clip_; }

 private:
  double learning_rate_;
  double clip_norm_;
  double last_clip_ = 1.0;
  TensorMap accumulators_;
};

struct IterationRecord {
  std::size_t iteration = 0;  // 1-based count of completed updates
  Phase phase = Phase::kMle;
  double loss = 0.0;  // batch mean
};

class Trainer {
 public:
  Trainer(Model& model, TrainingConfig config);

  // Needed before any ds iteration runs, one label per corpus pair.
  void set_ds_labels(std::vector<DsLabel> labels) { ds_labels_ = std::move(labels); }
  // Called when the schedule enters ds without labels; returns one per pair.
  void set_ds_labeler(std::function<std::vector<DsLabel>(const Model&)> labeler) { labeler_ = std::move(labeler); }

  Adagrad& optimizer() noexcept { return optimizer_; }
  std::size_t iteration() const noexcept { return iteration_; }
  // Continue a resumed run from this many completed iterations.
  void set_iteration(std::size_t it) noexcept { iteration_ = it; }

  std::size_t total_iterations() const noexcept;
  Phase phase_at(std::size_t iteration) const;

  // One update from the corpus entries at `batch`; returns the batch-mean
  // loss. Pairs whose distant-supervision weight is 0 are skipped outright.
  double step(std::span<const Example> corpus, std::span<const std::size_t> batch, Phase phase, std::mt19937_64& rng);

  // Runs the remaining schedule. on_iteration sees every completed update.
  void run(std::span<const Example> corpus, const std::function<void(const IterationRecord&)>& on_iteration = {});

 private:
  std::vector<std::size_t> batch_for(std::size_t corpus_size, std::size_t iteration);

  Model& model_;
  TrainingConfig config_;
  Adagrad optimizer_;
  std::size_t iteration_ = 0;
  std::vector<DsLabel> ds_labels_;
  std::function<std::vector<DsLabel>(const Model&)> labeler_;
  std::size_t cached_epoch_ = static_cast<std::size_t>(-1);
  std::vector<std::size_t> cached_order_;
};

// Mean per-token NLL of the references under teacher forcing.
double corpus_token_nll(const Model& model, std::span<const Example> corpus);

}  // namespace cpg
