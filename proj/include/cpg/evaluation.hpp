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

// Summary metrics: ROUGE-1/2/L, novel n-gram rates, UNK rates and lengths.
//
// Conventions: tokens compare exactly (no stemming, no stopword removal);
// corpus scores are the mean of per-example scores; with several references
// the best-scoring reference is used.

#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "cpg/corpus.hpp"

namespace cpg {

struct RougeScore {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

// f1 = 2pr / (p + r), or 0 when p + r = 0.
RougeScore make_rouge(double overlap, double candidate_total, double reference_total);

// Which field picks the best reference when there are several.
enum class RougeSelect { kF1, kRecall };

RougeScore rouge_n(std::span<const std::string> candidate, std::span<const TokenSeq> references, std::size_t n,
                   RougeSelect select = RougeSelect::kF1);
RougeScore rouge_l(std::span<const std::string> candidate, std::span<const TokenSeq> references,
                   RougeSelect select = RougeSelect::kF1);

std::size_t lcs_length(std::span<const std::string> a, std::span<const std::string> b);

// Longest prefix of at most `limit` bytes that ends at a token boundary.
std::string truncate_bytes(std::string_view text, std::size_t limit = 75);

// Percentage of distinct summary n-grams absent from the source (case
// insensitive); nullopt when the summary has fewer than n tokens.
std::optional<double> novel_ngram_rate(std::span<const std::string> summary, std::span<const std::string> source,
                                       std::size_t n);

struct OovRate {
  std::size_t unk = 0;
  std::size_t total = 0;
  double percentage = 0.0;

  // "1.16%": percentage rounded to two decimals.
  std::string formatted() const;
};

OovRate oov_rate(std::size_t unk, std::size_t total);
OovRate oov_rate(std::span<const TokenSeq> summaries, std::string_view marker = kUnkToken);

enum class EvalMode {
  kF1,        // full summaries, F1 headline
  kRecall75,  // summaries truncated to 75 bytes, recall headline
};

EvalMode parse_eval_mode(const std::string& name);
const char* eval_mode_name(EvalMode mode) noexcept;

struct EvalReport {
  EvalMode mode = EvalMode::kF1;
  std::size_t examples = 0;
  RougeScore rouge1, rouge2, rougeL;
  std::array<std::optional<double>, 3> novel;  // n = 1, 2, 3; empty without sources
  OovRate oov;
  double mean_length = 0.0;
};

// `references[i]` holds one or more references for summary i; `sources` may
// be empty, otherwise it aligns with `summaries`.
EvalReport evaluate(std::span<const std::string> summaries, std::span<const std::vector<std::string>> references,
                    std::span<const std::string> sources, EvalMode mode);

std::string format_report_table(const EvalReport& report);
std::string format_report_kv(const EvalReport& report);

}  // namespace cpg
