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


#include <doctest.h>

#include <algorithm>
#include <set>
#include <sstream>

#include "cpg/concepts.hpp"
#include "cpg/error.hpp"
#include "support.hpp"

using namespace cpg;
using cpg::testing::category_of;
using cpg::testing::message_of;
using cpg::testing::vocab_of;

namespace {

const std::string kData = CPG_TEST_DATA;

}  // namespace

TEST_CASE("an empty snapshot has no instances") {
  const ConceptGraph g = ConceptGraph::load(kData + "/empty.tsv");
  CHECK(g.instance_count() == 0);
  CHECK(g.lookup("apple").empty());
  CHECK(g.candidates("apple", 3).empty());
}

TEST_CASE("the apple fixture ranks fruit above company") {
  const ConceptGraph g = ConceptGraph::load(kData + "/apple.tsv");
  CHECK(g.candidates("apple", 5) == std::vector<ConceptEntry>{{"fruit", 0.6}, {"company", 0.3}});
  CHECK(g.candidates("apple", 1) == std::vector<ConceptEntry>{{"fruit", 0.6}});
  CHECK(g.candidates("pear", 3).empty());
}

TEST_CASE("malformed snapshot lines report their line number") {
  CHECK(category_of([] { ConceptGraph::load(kData + "/bad_prob.tsv"); }) == ErrorCategory::kParse);
  CHECK(message_of([] { ConceptGraph::load(kData + "/bad_prob.tsv"); }).find(":1:") != std::string::npos);
  CHECK(category_of([] { ConceptGraph::load(kData + "/bad_fields.tsv"); }) == ErrorCategory::kParse);
  std::istringstream in("a\tb\t0.5\n\na\tc\tzero\n");
  CHECK(message_of([&] { ConceptGraph::parse(in, "s"); }).find("s:3") != std::string::npos);
  CHECK(category_of([] { ConceptGraph::load(kData + "/missing.tsv"); }) == ErrorCategory::kIo);
}

TEST_CASE("multi-word fields are joined and repeats keep the larger prior") {
  std::istringstream in("new york\tbig city\t0.4\nnew york\tbig city\t0.5\nnew york\tplace\t0.5\n");
  const ConceptGraph g = ConceptGraph::parse(in);
  CHECK(g.candidates("new_york", 5) == std::vector<ConceptEntry>{{"big_city", 0.5}, {"place", 0.5}});
  CHECK(join_words("sporting  event") == "sporting_event");
}

TEST_CASE("retrieval keeps at most k candidates and skips the UNK concept") {
  ConceptGraph g;
  g.add("x", "a", 0.5);
  g.add("x", std::string(kUnkToken), 0.4);
  g.add("x", "b", 0.3);
  g.add("x", "c", 0.2);
  const TokenSeq src{"x", "y"};
  const ConceptCandidateSet s = retrieve_candidates(g, src, 2);
  REQUIRE(s.positions.size() == 2);
  REQUIRE(s.positions[0].size() == 2);
  CHECK(s.positions[0][0].token == "a");
  CHECK(s.positions[0][1].token == "b");
  CHECK(s.positions[1].empty());
  CHECK(s.has_any());
  CHECK(category_of([&] { retrieve_candidates(g, src, 0); }) == ErrorCategory::kInvalidArgument);
}

TEST_CASE("no concepts and no OOVs leave the base size") {
  const Vocabulary v = vocab_of({"a", "b"});
  const Example e = prepare_example({tokenize("a b"), tokenize("b")}, v, nullptr, 3);
  CHECK(e.vocab.size() == v.size());
  CHECK_FALSE(e.concepts.has_any());
}

TEST_CASE("one OOV and one novel concept add two disjoint ids") {
  const Vocabulary v = vocab_of({"a"});
  ConceptGraph g;
  g.add("zyx", "thing", 0.9);
  const Example e = prepare_example({tokenize("a zyx"), tokenize("thing")}, v, &g, 1);
  CHECK(e.vocab.size() == v.size() + 2);
  const TokenId oov = *e.vocab.find("zyx");
  const TokenId con = *e.vocab.find("thing");
  CHECK(oov == static_cast<TokenId>(v.size()));
  CHECK(con == static_cast<TokenId>(v.size() + 1));
  CHECK(e.concepts.positions[1][0].id == con);
  CHECK(e.vocab.is_concept(con));
  CHECK_FALSE(e.vocab.is_concept(oov));
  CHECK(e.vocab.input_id(con) == kUnkId);
  CHECK(e.vocab.input_id(4) == 4);
  CHECK(e.target_ids == std::vector<TokenId>{con, kEosId});
  CHECK(e.vocab.token(con) == "thing");
}

TEST_CASE("extended ids never duplicate a token") {
  std::mt19937_64 rng(21);
  const std::vector<std::string> pool = cpg::testing::numbered("t", 12);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<std::string> base;
    for (const auto& w : pool)
      if (uniform01(rng) < 0.3) base.push_back(w);
    const Vocabulary v = vocab_of(base);
    ConceptGraph g;
    for (const auto& w : pool)
      for (int j = 0; j < 3; ++j)
        if (uniform01(rng) < 0.5) g.add(w, pool[cpg::testing::pick(pool.size(), rng)], 0.1 + 0.3 * j);
    TokenSeq src;
    for (int i = 0; i < 6; ++i) src.push_back(pool[cpg::testing::pick(pool.size(), rng)]);
    const Example e = prepare_example({src, TokenSeq{pool[0]}}, v, &g, 3);
    std::set<std::string> seen;
    for (TokenId id = 0; id < static_cast<TokenId>(e.vocab.size()); ++id) {
      CHECK(seen.insert(e.vocab.token(id)).second);
      CHECK(e.vocab.find(e.vocab.token(id)) == id);
    }
    for (const auto& pos : e.concepts.positions)
      for (const auto& c : pos) CHECK(e.vocab.token(c.id) == c.token);
  }
}

TEST_CASE("concept tokens fill spare vocabulary room") {
  Vocabulary v = vocab_of({"apple", "pear"});
  ConceptGraph g;
  g.add("apple", "fruit", 0.6);
  g.add("apple", "company", 0.3);
  g.add("pear", "fruit", 0.9);
  g.add("kiwi", "bird", 0.9);
  CHECK(add_concept_tokens(v, g, 1, 100) == 1);
  CHECK(v.contains("fruit"));
  CHECK_FALSE(v.contains("company"));
  CHECK_FALSE(v.contains("bird"));
  CHECK(add_concept_tokens(v, g, 2, v.size()) == 0);
}
