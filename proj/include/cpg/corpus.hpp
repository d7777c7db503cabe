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

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace cpg {

using TokenId = std::int32_t;
using TokenSeq = std::vector<std::string>;

inline constexpr TokenId kPadId = 0;
inline constexpr TokenId kUnkId = 1;
inline constexpr TokenId kSosId = 2;
inline constexpr TokenId kEosId = 3;
inline constexpr std::size_t kReservedTokens = 4;

inline constexpr std::string_view kPadToken = "<pad>";
inline constexpr std::string_view kUnkToken = "<unk>";
inline constexpr std::string_view kSosToken = "<s>";
inline constexpr std::string_view kEosToken = "</s>";

/// Token <-> id map with PAD, UNK, SOS and EOS pinned to ids 0..3.
class Vocabulary {
 public:
  Vocabulary();

  // Keeps the most frequent tokens so that size() <= max_size (reserved
  // tokens included). Equal counts are ordered lexicographically.
  static Vocabulary build(std::span<const TokenSeq> corpus, std::size_t max_size);

  // Restores a vocabulary from its id-ordered token list (reserved first).
  static Vocabulary from_tokens(std::vector<std::string> tokens);

  // Appends a token if absent and returns its id.
  TokenId add(const std::string& token);

  std::optional<TokenId> find(std::string_view token) const;
  TokenId id(std::string_view token) const { return find(token).value_or(kUnkId); }
  bool contains(std::string_view token) const { return find(token).has_value(); }
  const std::string& token(TokenId id) const;

  std::size_t size() const noexcept { return tokens_.size(); }
  const std::vector<std::string>& tokens() const noexcept { return tokens_; }

 private:
  struct Hash {
    using is_transparent = void;
    std::size_t operator()(std::string_view s) const noexcept { return std::hash<std::string_view>{}(s); }
  };

  std::vector<std::string> tokens_;
  std::unordered_map<std::string, TokenId, Hash, std::equal_to<>> index_;
};

struct DocumentPair {
  TokenSeq source;
  TokenSeq reference;
};

/// A pair mapped to ids. Source tokens missing from the vocabulary get
/// per-example extended ids starting at |V|, in order of first appearance.
struct EncodedExample {
  TokenSeq source_tokens;
  TokenSeq reference_tokens;
  std::vector<TokenId> source_ids;      // extended ids (OOVs >= |V|)
  std::vector<std::string> source_oovs;  // token of extended id |V| + j
  std::vector<TokenId> target_ids;      // extended ids, EOS-terminated
};

EncodedExample encode_pair(const DocumentPair& pair, const Vocabulary& vocab);

// Maps extended ids back to tokens through the vocabulary and OOV table.
TokenSeq decode_ids(std::span<const TokenId> ids, const Vocabulary& vocab, std::span<const std::string> oovs);

TokenSeq tokenize(std::string_view line);
std::vector<std::string> read_lines(const std::string& path);

// Reads two line-aligned files. Fails on a line-count mismatch or an empty side.
std::vector<DocumentPair> read_parallel_corpus(const std::string& source_path, const std::string& target_path);

}  // namespace cpg
