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

#include "cpg/corpus.hpp"

#include <algorithm>
#include <fstream>
#include <map>

#include "cpg/error.hpp"

namespace cpg {

Vocabulary::Vocabulary() {
  for (std::string_view t : {kPadToken, kUnkToken, kSosToken, kEosToken}) add(std::string(t));
}

Vocabulary Vocabulary::build(std::span<const TokenSeq> corpus, std::size_t max_size) {
  if (max_size < kReservedTokens) {
    fail(ErrorCategory::kInvalidArgument, "vocabulary: max size " + std::to_string(max_size) + " below the reserved count");
  }
  std::map<std::string, std::size_t> counts;
  for (const TokenSeq& line : corpus)
    for (const std::string& tok : line) ++counts[tok];
  if (counts.empty()) fail(ErrorCategory::kInvalidArgument, "vocabulary: empty corpus");

  Vocabulary vocab;
  for (std::string_view t : {kPadToken, kUnkToken, kSosToken, kEosToken}) counts.erase(std::string(t));
  std::vector<std::pair<std::string, std::size_t>> ranked(counts.begin(), counts.end());
  // counts is lexicographic already; a stable sort by frequency keeps that order for ties.
  std::stable_sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) { return a.second > b.second; });
  for (const auto& [tok, _] : ranked) {
    if (vocab.size() >= max_size) break;
    vocab.add(tok);
  }
  return vocab;
}

Vocabulary Vocabulary::from_tokens(std::vector<std::string> tokens) {
  Vocabulary vocab;
  if (tokens.size() < kReservedTokens) fail(ErrorCategory::kParse, "vocabulary: missing reserved tokens");
  for (std::size_t i = 0; i < kReservedTokens; ++i) {
    if (tokens[i] != vocab.tokens_[i]) fail(ErrorCategory::kParse, "vocabulary: reserved token mismatch at id " + std::to_string(i));
  }
  for (std::size_t i = kReservedTokens; i < tokens.size(); ++i) {
    if (vocab.contains(tokens[i])) fail(ErrorCategory::kParse, "vocabulary: duplicate token '" + tokens[i] + "'");
    vocab.add(tokens[i]);
  }
  return vocab;
}

TokenId Vocabulary::add(const std::string& token) {
  if (auto id = find(token)) return *id;
  const auto id = static_cast<TokenId>(tokens_.size());
  tokens_.push_back(token);
  index_.emplace(token, id);
  return id;
}

std::optional<TokenId> Vocabulary::find(std::string_view token) const {
  auto it = index_.find(token);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

const std::string& Vocabulary::token(TokenId id) const {
  if (id < 0 || static_cast<std::size_t>(id) >= tokens_.size()) {
    fail(ErrorCategory::kInvalidArgument, "vocabulary: unknown id " + std::to_string(id));
  }
  return tokens_[static_cast<std::size_t>(id)];
}

EncodedExample encode_pair(const DocumentPair& pair, const Vocabulary& vocab) {
  EncodedExample ex;
  ex.source_tokens = pair.source;
  ex.reference_tokens = pair.reference;
  const auto base = static_cast<TokenId>(vocab.size());
  auto oov_id = [&](const std::string& tok) -> std::optional<TokenId> {
    auto it = std::find(ex.source_oovs.begin(), ex.source_oovs.end(), tok);
    if (it == ex.source_oovs.end()) return std::nullopt;
    return base + static_cast<TokenId>(it - ex.source_oovs.begin());
  };
  for (const std::string& tok : pair.source) {
    if (auto id = vocab.find(tok)) {
      ex.source_ids.push_back(*id);
    } else if (auto ext = oov_id(tok)) {
      ex.source_ids.push_back(*ext);
    } else {
      ex.source_oovs.push_back(tok);
      ex.source_ids.push_back(base + static_cast<TokenId>(ex.source_oovs.size() - 1));
    }
  }
  for (const std::string& tok : pair.reference) {
    if (auto id = vocab.find(tok)) {
      ex.target_ids.push_back(*id);
    } else {
      ex.target_ids.push_back(oov_id(tok).value_or(kUnkId));
    }
  }
  ex.target_ids.push_back(kEosId);
  return ex;
}

TokenSeq decode_ids(std::span<const TokenId> ids, const Vocabulary& vocab, std::span<const std::string> oovs) {
  TokenSeq out;
  out.reserve(ids.size());
  const auto base = static_cast<TokenId>(vocab.size());
  for (TokenId id : ids) {
    if (id >= base && static_cast<std::size_t>(id - base) < oovs.size()) {
      out.push_back(oovs[static_cast<std::size_t>(id - base)]);
    } else {
      out.push_back(vocab.token(id));
    }
  }
  return out;
}

TokenSeq tokenize(std::string_view line) {
  TokenSeq out;
  std::size_t i = 0;
  auto is_space = [](char c) { return c == ' ' || c == '\t' || c == '\r' || c == '\n' || c == '\f' || c == '\v'; };
  while (i < line.size()) {
    while (i < line.size() && is_space(line[i])) ++i;
    std::size_t j = i;
    while (j < line.size() && !is_space(line[j])) ++j;
    if (j > i) out.emplace_back(line.substr(i, j - i));
    i = j;
  }
  return out;
}

std::vector<std::string> read_lines(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCategory::kIo, "cannot open '" + path + "'");
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(std::move(line));
  }
  return lines;
}

std::vector<DocumentPair> read_parallel_corpus(const std::string& source_path, const std::string& target_path) {
  const auto sources = read_lines(source_path);
  const auto targets = read_lines(target_path);
  if (sources.size() != targets.size()) {
    fail(ErrorCategory::kMismatch, "corpus: " + source_path + " has " + std::to_string(sources.size()) + " lines but " +
                                       target_path + " has " + std::to_string(targets.size()));
  }
  std::vector<DocumentPair> pairs;
  pairs.reserve(sources.size());
  for (std::size_t i = 0; i < sources.size(); ++i) {
    DocumentPair p{tokenize(sources[i]), tokenize(targets[i])};
    if (p.source.empty() || p.reference.empty()) {
      fail(ErrorCategory::kParse, "corpus: empty source or reference at line " + std::to_string(i + 1));
    }
    pairs.push_back(std::move(p));
  }
  return pairs;
}

}  // namespace cpg
