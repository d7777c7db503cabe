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

#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "cpg/corpus.hpp"

namespace cpg {

struct ConceptEntry {
  std::string concept_token;
  double prior = 0.0;

  friend bool operator==(const ConceptEntry&, const ConceptEntry&) = default;
};

/// isA snapshot: instance token -> concepts with p(concept | instance),
/// ordered by descending probability, ties lexicographic.
class ConceptGraph {
 public:
  // TSV lines "instance<TAB>concept<TAB>probability". Blank lines are
  // skipped. Multi-word fields are joined with underscores.
  static ConceptGraph load(const std::string& path);
  static ConceptGraph parse(std::istream& in, const std::string& origin = "<stream>");

  // Inserts one relation; a repeated (instance, concept) keeps the larger prior.
  void add(const std::string& instance, const std::string& concept_token, double prior);

  std::span<const ConceptEntry> lookup(std::string_view instance) const;
  std::vector<ConceptEntry> candidates(std::string_view word, std::size_t k) const;

  std::size_t instance_count() const noexcept { return entries_.size(); }

 private:
  std::unordered_map<std::string, std::vector<ConceptEntry>> entries_;
};

// "sporting event" -> "sporting_event".
std::string join_words(std::string_view text);

struct ConceptCandidate {
  std::string token;
  double prior = 0.0;
  TokenId id = kUnkId;  // extended id, set by ExtendedVocab::build
};

/// Top-k candidates per source position; empty where the word has no entry.
struct ConceptCandidateSet {
  std::vector<std::vector<ConceptCandidate>> positions;

  bool has_any() const noexcept;
};

// Candidates whose token is the UNK marker are dropped.
ConceptCandidateSet retrieve_candidates(const ConceptGraph& graph, std::span<const std::string> source, std::size_t k);

/// Id space of one example: [0, |V|) base, then source OOVs, then concept
/// tokens found in neither. Holds a pointer to the base vocabulary, which must
/// outlive it.
class ExtendedVocab {
 public:
  ExtendedVocab() = default;

  // Assigns ids to every candidate in `sets` and returns the merged space.
  static ExtendedVocab build(const EncodedExample& example, ConceptCandidateSet& sets, const Vocabulary& vocab);

  std::size_t base_size() const noexcept { return base_size_; }
  std::size_t size() const noexcept { return base_size_ + oovs_.size() + concepts_.size(); }
  std::span<const std::string> oovs() const noexcept { return oovs_; }
  std::span<const std::string> concepts() const noexcept { return concepts_; }

  std::optional<TokenId> find(std::string_view token) const;
  const std::string& token(TokenId id) const;
  // Ids outside the base vocabulary feed the decoder as UNK.
  TokenId input_id(TokenId id) const noexcept;
  // True when some position offered this id as a concept candidate.
  bool is_concept(TokenId id) const;

  // EOS-terminated ids for a reference; tokens outside the space become UNK.
  std::vector<TokenId> encode(std::span<const std::string> tokens) const;

 private:
  const Vocabulary* vocab_ = nullptr;
  std::size_t base_size_ = 0;
  std::vector<std::string> oovs_;
  std::vector<std::string> concepts_;
  std::vector<TokenId> concept_ids_;  // sorted
};

/// Everything a model step needs about one example.
struct Example {
  EncodedExample encoded;
  ConceptCandidateSet concepts;
  ExtendedVocab vocab;
  std::vector<TokenId> target_ids;  // extended ids, EOS-terminated
};

// `graph` may be null for a model without concepts.
Example prepare_example(const DocumentPair& pair, const Vocabulary& vocab, const ConceptGraph* graph, std::size_t k);

// Adds the top-k concepts of every in-vocabulary word, up to max_size entries.
// Returns the number of tokens added.
std::size_t add_concept_tokens(Vocabulary& vocab, const ConceptGraph& graph, std::size_t k, std::size_t max_size);

}  // namespace cpg
