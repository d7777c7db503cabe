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


// Fixture builders shared by the unit and acceptance tests.

#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include <unistd.h>

#include "cpg/concepts.hpp"
#include "cpg/corpus.hpp"
#include "cpg/error.hpp"
#include "cpg/model.hpp"
#include "cpg/random.hpp"

namespace cpg::testing {

inline Vocabulary vocab_of(const std::vector<std::string>& words) {
  std::vector<std::string> all{std::string(kPadToken), std::string(kUnkToken), std::string(kSosToken),
                               std::string(kEosToken)};
  all.insert(all.end(), words.begin(), words.end());
  return Vocabulary::from_tokens(all);
}

inline ModelConfig small_config(std::size_t vocab_size, std::size_t hidden, std::size_t embedding) {
  ModelConfig c;
  c.vocab_size = vocab_size;
  c.hidden_dim = hidden;
  c.embedding_dim = embedding;
  return c;
}

inline Model random_model(const ModelConfig& config, std::uint64_t seed) {
  Model m(config);
  m.initialize(seed);
  return m;
}

inline Example example_of(const std::string& source, const std::string& reference, const Vocabulary& vocab,
                          const ConceptGraph* graph, std::size_t k) {
  return prepare_example({tokenize(source), tokenize(reference)}, vocab, graph, k);
}

inline double sum_of(const Tensor& t) {
  double s = 0.0;
  for (double v : t.data()) s += v;
  return s;
}

// Words w0..w{n-1}.
inline std::vector<std::string> numbered(const std::string& stem, std::size_t n) {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back(stem + std::to_string(i));
  return out;
}

inline std::string join(const std::vector<std::string>& words) {
  std::string out;
  for (const std::string& w : words) {
    if (!out.empty()) out += ' ';
    out += w;
  }
  return out;
}

// Scratch directory removed on destruction.
struct TempDir {
  std::filesystem::path path;

  explicit TempDir(const std::string& stem = "cpg_test") {
    static int counter = 0;
    path = std::filesystem::temp_directory_path() /
           (stem + "_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    std::filesystem::remove_all(path);
    std::filesystem::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  std::string file(const std::string& name) const { return (path / name).string(); }
};

// Category of the cpg::Error thrown by f, or kInternal when nothing is thrown.
inline ErrorCategory category_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.category();
  }
  return ErrorCategory::kInternal;
}

inline std::string message_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.what();
  }
  return {};
}

inline std::size_t pick(std::size_t n, std::mt19937_64& rng) {
  return static_cast<std::size_t>(uniform01(rng) * static_cast<double>(n));
}

}  // namespace cpg::testing
