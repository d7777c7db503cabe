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

#include "cpg/concepts.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <istream>
#include <system_error>

#include "cpg/error.hpp"

namespace cpg {
namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

bool entry_before(const ConceptEntry& a, const ConceptEntry& b) {
  if (a.prior != b.prior) return a.prior > b.prior;
  return a.concept_token < b.concept_token;
}

}  // namespace

std::string join_words(std::string_view text) {
  std::string out;
  for (const std::string& w : tokenize(text)) {
    if (!out.empty()) out += '_';
    out += w;
  }
  return out;
}

ConceptGraph ConceptGraph::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCategory::kIo, "cannot open concept snapshot '" + path + "'");
  return parse(in, path);
}

ConceptGraph ConceptGraph::parse(std::istream& in, const std::string& origin) {
  ConceptGraph graph;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string where = origin + ":" + std::to_string(lineno);
    if (trim(line).empty()) continue;
    std::vector<std::string_view> fields;
    std::string_view rest = line;
    for (std::size_t pos; (pos = rest.find('\t')) != std::string_view::npos;) {
      fields.push_back(rest.substr(0, pos));
      rest.remove_prefix(pos + 1);
    }
    fields.push_back(rest);
    if (fields.size() != 3) {
      fail(ErrorCategory::kParse, where + ": expected 3 tab-separated fields, found " + std::to_string(fields.size()));
    }
    const std::string instance = join_words(fields[0]);
    const std::string concept_token = join_words(fields[1]);
    if (instance.empty() || concept_token.empty()) fail(ErrorCategory::kParse, where + ": empty instance or concept");
    const std::string_view prob_text = trim(fields[2]);
    double prior = 0.0;
    auto res = std::from_chars(prob_text.data(), prob_text.data() + prob_text.size(), prior);
    if (res.ec != std::errc() || res.ptr != prob_text.data() + prob_text.size()) {
      fail(ErrorCategory::kParse, where + ": bad probability '" + std::string(prob_text) + "'");
    }
    if (!(prior > 0.0 && prior <= 1.0)) {
      fail(ErrorCategory::kParse, where + ": probability " + std::string(prob_text) + " outside (0, 1]");
    }
    graph.add(instance, concept_token, prior);
  }
  return graph;
}

void ConceptGraph::add(const std::string& instance, const std::string& concept_token, double prior) {
  if (!(prior > 0.0 && prior <= 1.0)) {
    fail(ErrorCategory::kInvalidArgument, "concept graph: probability outside (0, 1] for " + instance);
  }
  auto& list = entries_[instance];
  auto it = std::find_if(list.begin(), list.end(), [&](const ConceptEntry& e) { return e.concept_token == concept_token; });
  if (it != list.end()) {
    if (prior <= it->prior) return;
    list.erase(it);
  }
  ConceptEntry entry{concept_token, prior};
  list.insert(std::upper_bound(list.begin(), list.end(), entry, entry_before), std::move(entry));
}

std::span<const ConceptEntry> ConceptGraph::lookup(std::string_view instance) const {
  auto it = entries_.find(std::string(instance));
  if (it == entries_.end()) return {};
  return it->second;
}

std::vector<ConceptEntry> ConceptGraph::candidates(std::string_view word, std::size_t k) const {
  const auto all = lookup(word);
  return {all.begin(), all.begin() + static_cast<std::ptrdiff_t>(std::min(k, all.size()))};
}

bool ConceptCandidateSet::has_any() const noexcept {
  return std::any_of(positions.begin(), positions.end(), [](const auto& p) { return !p.empty(); });
}

ConceptCandidateSet retrieve_candidates(const ConceptGraph& graph, std::span<const std::string> source, std::size_t k) {
  if (k == 0) fail(ErrorCategory::kInvalidArgument, "concept candidates: k must be at least 1");
  ConceptCandidateSet set;
  set.positions.resize(source.size());
  for (std::size_t i = 0; i < source.size(); ++i) {
    std::size_t taken = 0;
    for (const ConceptEntry& e : graph.lookup(source[i])) {
      if (taken == k) break;
      if (e.concept_token == kUnkToken) continue;
      set.positions[i].push_back({e.concept_token, e.prior, kUnkId});
      ++taken;
    }
  }
  return set;
}

ExtendedVocab ExtendedVocab::build(const EncodedExample& example, ConceptCandidateSet& sets, const Vocabulary& vocab) {
  ExtendedVocab ext;
  ext.vocab_ = &vocab;
  ext.base_size_ = vocab.size();
  ext.oovs_ = example.source_oovs;
  for (auto& position : sets.positions) {
    for (ConceptCandidate& c : position) {
      if (auto id = ext.find(c.token)) {
        c.id = *id;
      } else {
        ext.concepts_.push_back(c.token);
        c.id = static_cast<TokenId>(ext.size() - 1);
      }
      ext.concept_ids_.push_back(c.id);
    }
  }
  std::sort(ext.concept_ids_.begin(), ext.concept_ids_.end());
  ext.concept_ids_.erase(std::unique(ext.concept_ids_.begin(), ext.concept_ids_.end()), ext.concept_ids_.end());
  return ext;
}

std::optional<TokenId> ExtendedVocab::find(std::string_view token) const {
  if (vocab_) {
    if (auto id = vocab_->find(token)) return id;
  }
  auto oov = std::find(oovs_.begin(), oovs_.end(), token);
  if (oov != oovs_.end()) return static_cast<TokenId>(base_size_ + static_cast<std::size_t>(oov - oovs_.begin()));
  auto con = std::find(concepts_.begin(), concepts_.end(), token);
  if (con != concepts_.end()) {
    return static_cast<TokenId>(base_size_ + oovs_.size() + static_cast<std::size_t>(con - concepts_.begin()));
  }
  return std::nullopt;
}

const std::string& ExtendedVocab::token(TokenId id) const {
  if (id < 0 || static_cast<std::size_t>(id) >= size()) {
    fail(ErrorCategory::kInvalidArgument, "extended vocabulary: unknown id " + std::to_string(id));
  }
  const auto i = static_cast<std::size_t>(id);
  if (i < base_size_) return vocab_->token(id);
  if (i < base_size_ + oovs_.size()) return oovs_[i - base_size_];
  return concepts_[i - base_size_ - oovs_.size()];
}

TokenId ExtendedVocab::input_id(TokenId id) const noexcept {
  return id >= 0 && static_cast<std::size_t>(id) < base_size_ ? id : kUnkId;
}

bool ExtendedVocab::is_concept(TokenId id) const {
  return std::binary_search(concept_ids_.begin(), concept_ids_.end(), id);
}

std::vector<TokenId> ExtendedVocab::encode(std::span<const std::string> tokens) const {
  std::vector<TokenId> ids;
  ids.reserve(tokens.size() + 1);
  for (const std::string& t : tokens) ids.push_back(find(t).value_or(kUnkId));
  ids.push_back(kEosId);
  return ids;
}

Example prepare_example(const DocumentPair& pair, const Vocabulary& vocab, const ConceptGraph* graph, std::size_t k) {
  Example ex;
  ex.encoded = encode_pair(pair, vocab);
  if (graph) {
    ex.concepts = retrieve_candidates(*graph, ex.encoded.source_tokens, k);
  } else {
    ex.concepts.positions.resize(ex.encoded.source_tokens.size());
  }
  ex.vocab = ExtendedVocab::build(ex.encoded, ex.concepts, vocab);
  ex.target_ids = ex.vocab.encode(ex.encoded.reference_tokens);
  return ex;
}

std::size_t add_concept_tokens(Vocabulary& vocab, const ConceptGraph& graph, std::size_t k, std::size_t max_size) {
  const std::vector<std::string> words = vocab.tokens();
  std::size_t added = 0;
  for (std::size_t i = kReservedTokens; i < words.size(); ++i) {
    for (const ConceptEntry& e : graph.candidates(words[i], k)) {
      if (vocab.size() >= max_size) return added;
      if (e.concept_token == kUnkToken || vocab.contains(e.concept_token)) continue;
      vocab.add(e.concept_token);
      ++added;
    }
  }
  return added;
}

}  // namespace cpg
