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

#include "cpg/evaluation.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <map>
#include <set>
#include <sstream>

#include "cpg/error.hpp"

namespace cpg {
namespace {

using NGram = std::vector<std::string>;

std::map<NGram, std::size_t> ngram_counts(std::span<const std::string> tokens, std::size_t n) {
  std::map<NGram, std::size_t> counts;
  for (std::size_t i = 0; i + n <= tokens.size(); ++i) ++counts[NGram(tokens.begin() + i, tokens.begin() + i + n)];
  return counts;
}

std::size_t ngram_total(std::size_t length, std::size_t n) { return length >= n ? length - n + 1 : 0; }

bool better(const RougeScore& a, const RougeScore& b, RougeSelect select) {
  return select == RougeSelect::kF1 ? a.f1 > b.f1 : a.recall > b.recall;
}

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

std::string fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", digits, v);
  return buf;
}

}  // namespace

RougeScore make_rouge(double overlap, double candidate_total, double reference_total) {
  RougeScore s;
  s.precision = candidate_total > 0 ? overlap / candidate_total : 0.0;
  s.recall = reference_total > 0 ? overlap / reference_total : 0.0;
  s.f1 = s.precision + s.recall > 0 ? 2 * s.precision * s.recall / (s.precision + s.recall) : 0.0;
  return s;
}

RougeScore rouge_n(std::span<const std::string> candidate, std::span<const TokenSeq> references, std::size_t n,
                   RougeSelect select) {
  if (n < 1) fail(ErrorCategory::kInvalidArgument, "rouge_n: n must be at least 1");
  const auto cand = ngram_counts(candidate, n);
  RougeScore best;
  for (const TokenSeq& ref : references) {
    const auto refc = ngram_counts(ref, n);
    std::size_t overlap = 0;
    for (const auto& [gram, count] : cand) {
      auto it = refc.find(gram);
      if (it != refc.end()) overlap += std::min(count, it->second);
    }
    const RougeScore s = make_rouge(static_cast<double>(overlap), static_cast<double>(ngram_total(candidate.size(), n)),
                                    static_cast<double>(ngram_total(ref.size(), n)));
    if (better(s, best, select)) best = s;
  }
  return best;
}

std::size_t lcs_length(std::span<const std::string> a, std::span<const std::string> b) {
  std::vector<std::size_t> prev(b.size() + 1, 0), cur(b.size() + 1, 0);
  for (std::size_t i = 1; i <= a.size(); ++i) {
    for (std::size_t j = 1; j <= b.size(); ++j) {
      cur[j] = a[i - 1] == b[j - 1] ? prev[j - 1] + 1 : std::max(prev[j], cur[j - 1]);
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

RougeScore rouge_l(std::span<const std::string> candidate, std::span<const TokenSeq> references, RougeSelect select) {
  RougeScore best;
  for (const TokenSeq& ref : references) {
    const RougeScore s = make_rouge(static_cast<double>(lcs_length(candidate, ref)), static_cast<double>(candidate.size()),
                                    static_cast<double>(ref.size()));
    if (better(s, best, select)) best = s;
  }
  return best;
}

std::string truncate_bytes(std::string_view text, std::size_t limit) {
  std::string out;
  for (const std::string& tok : tokenize(text)) {
    const std::size_t needed = out.size() + (out.empty() ? 0 : 1) + tok.size();
    if (needed > limit) break;
    if (!out.empty()) out += ' ';
    out += tok;
  }
  return out;
}

std::optional<double> novel_ngram_rate(std::span<const std::string> summary, std::span<const std::string> source,
                                       std::size_t n) {
  if (n < 1) fail(ErrorCategory::kInvalidArgument, "novel_ngram_rate: n must be at least 1");
  if (summary.size() < n) return std::nullopt;
  auto grams = [n](std::span<const std::string> tokens) {
    std::set<NGram> out;
    for (std::size_t i = 0; i + n <= tokens.size(); ++i) {
      NGram g;
      for (std::size_t j = i; j < i + n; ++j) g.push_back(lower(tokens[j]));
      out.insert(std::move(g));
    }
    return out;
  };
  const auto sum_grams = grams(summary);
  const auto src_grams = grams(source);
  std::size_t novel = 0;
  for (const NGram& g : sum_grams) novel += src_grams.contains(g) ? 0 : 1;
  return 100.0 * static_cast<double>(novel) / static_cast<double>(sum_grams.size());
}

std::string OovRate::formatted() const { return fixed(percentage, 2) + "%"; }

OovRate oov_rate(std::size_t unk, std::size_t total) {
  if (unk > total) fail(ErrorCategory::kInvalidArgument, "oov_rate: more UNKs than words");
  return {unk, total, total ? 100.0 * static_cast<double>(unk) / static_cast<double>(total) : 0.0};
}

OovRate oov_rate(std::span<const TokenSeq> summaries, std::string_view marker) {
  std::size_t unk = 0, total = 0;
  for (const TokenSeq& s : summaries) {
    total += s.size();
    unk += static_cast<std::size_t>(std::count(s.begin(), s.end(), marker));
  }
  return oov_rate(unk, total);
}

EvalMode parse_eval_mode(const std::string& name) {
  if (name == "f1") return EvalMode::kF1;
  if (name == "recall75") return EvalMode::kRecall75;
  fail(ErrorCategory::kConfig, "eval mode must be 'f1' or 'recall75', got '" + name + "'");
}

const char* eval_mode_name(EvalMode mode) noexcept { return mode == EvalMode::kF1 ? "f1" : "recall75"; }

EvalReport evaluate(std::span<const std::string> summaries, std::span<const std::vector<std::string>> references,
                    std::span<const std::string> sources, EvalMode mode) {
  if (summaries.size() != references.size()) {
    fail(ErrorCategory::kMismatch, "evaluate: " + std::to_string(summaries.size()) + " summaries but " +
                                       std::to_string(references.size()) + " reference lines");
  }
  if (!sources.empty() && sources.size() != summaries.size()) {
    fail(ErrorCategory::kMismatch, "evaluate: " + std::to_string(summaries.size()) + " summaries but " +
                                       std::to_string(sources.size()) + " source lines");
  }
  EvalReport report;
  report.mode = mode;
  report.examples = summaries.size();
  const RougeSelect select = mode == EvalMode::kF1 ? RougeSelect::kF1 : RougeSelect::kRecall;
  std::vector<TokenSeq> generated;
  std::array<double, 3> novel_sum{};
  std::array<std::size_t, 3> novel_count{};
  double length_sum = 0.0;
  auto accumulate = [](RougeScore& acc, const RougeScore& s) {
    acc.precision += s.precision;
    acc.recall += s.recall;
    acc.f1 += s.f1;
  };
  for (std::size_t i = 0; i < summaries.size(); ++i) {
    TokenSeq summary = tokenize(summaries[i]);
    const TokenSeq scored = mode == EvalMode::kRecall75 ? tokenize(truncate_bytes(summaries[i], 75)) : summary;
    std::vector<TokenSeq> refs;
    for (const std::string& r : references[i]) refs.push_back(tokenize(r));
    accumulate(report.rouge1, rouge_n(scored, refs, 1, select));
    accumulate(report.rouge2, rouge_n(scored, refs, 2, select));
    accumulate(report.rougeL, rouge_l(scored, refs, select));
    if (!sources.empty()) {
      const TokenSeq src = tokenize(sources[i]);
      for (std::size_t n = 1; n <= 3; ++n) {
        if (auto rate = novel_ngram_rate(summary, src, n)) {
          novel_sum[n - 1] += *rate;
          ++novel_count[n - 1];
        }
      }
    }
    length_sum += static_cast<double>(summary.size());
    generated.push_back(std::move(summary));
  }
  if (report.examples) {
    const double n = static_cast<double>(report.examples);
    for (RougeScore* s : {&report.rouge1, &report.rouge2, &report.rougeL}) {
      s->precision /= n;
      s->recall /= n;
      s->f1 /= n;
    }
    report.mean_length = length_sum / n;
  }
  for (std::size_t k = 0; k < 3; ++k) {
    if (novel_count[k]) report.novel[k] = novel_sum[k] / static_cast<double>(novel_count[k]);
  }
  report.oov = oov_rate(generated);
  return report;
}

std::string format_report_table(const EvalReport& r) {
  std::ostringstream out;
  out << "mode: " << eval_mode_name(r.mode) << "  examples: " << r.examples << "\n";
  out << "metric      precision  recall     f1\n";
  auto line = [&](const char* name, const RougeScore& s) {
    out << name << "  " << fixed(100 * s.precision, 2) << "      " << fixed(100 * s.recall, 2) << "      "
        << fixed(100 * s.f1, 2) << "\n";
  };
  line("ROUGE-1   ", r.rouge1);
  line("ROUGE-2   ", r.rouge2);
  line("ROUGE-L   ", r.rougeL);
  for (std::size_t k = 0; k < 3; ++k) {
    out << "novel " << (k + 1) << "-grams: " << (r.novel[k] ? fixed(*r.novel[k], 2) + "%" : std::string("n/a")) << "\n";
  }
  out << "UNK: " << r.oov.formatted() << " (" << r.oov.unk << "/" << r.oov.total << ")\n";
  out << "mean length: " << fixed(r.mean_length, 2) << "\n";
  return out.str();
}

std::string format_report_kv(const EvalReport& r) {
  std::ostringstream out;
  out << "mode=" << eval_mode_name(r.mode) << "\n";
  out << "examples=" << r.examples << "\n";
  auto score = [&](const char* name, const RougeScore& s) {
    out << name << "_p=" << fixed(s.precision, 6) << "\n";
    out << name << "_r=" << fixed(s.recall, 6) << "\n";
    out << name << "_f=" << fixed(s.f1, 6) << "\n";
  };
  score("rouge1", r.rouge1);
  score("rouge2", r.rouge2);
  score("rougeL", r.rougeL);
  for (std::size_t k = 0; k < 3; ++k) {
    out << "novel" << (k + 1) << "=" << (r.novel[k] ? fixed(*r.novel[k], 4) : std::string("nan")) << "\n";
  }
  out << "unk_count=" << r.oov.unk << "\n";
  out << "total_words=" << r.oov.total << "\n";
  out << "unk_percent=" << fixed(r.oov.percentage, 2) << "\n";
  out << "mean_length=" << fixed(r.mean_length, 4) << "\n";
  return out.str();
}

}  // namespace cpg
