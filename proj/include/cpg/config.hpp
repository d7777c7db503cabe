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


// Flat key=value run configuration shared by every subcommand.
//
// Files hold one "key = value" per line; '#' starts a comment. Command-line
// overrides go through set() after the file is loaded. Every key has a
// default from the selected profile, and unknown keys are rejected.

#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "cpg/decoding.hpp"
#include "cpg/evaluation.hpp"
#include "cpg/model.hpp"
#include "cpg/training.hpp"

namespace cpg {

enum class Profile {
  kFull,  // full-size settings
  kDesk,  // hidden 32, embedding 16, vocabulary 200
};

Profile parse_profile(const std::string& name);

class RunConfig {
 public:
  explicit RunConfig(Profile profile = Profile::kDesk);

  static bool known(const std::string& key);
  static const std::vector<std::string>& keys();

  void set(const std::string& key, const std::string& value);
  void load_file(const std::string& path);

  const std::string& get(const std::string& key) const;
  bool has(const std::string& key) const { return !get(key).empty(); }
  // True when the key was given by a file or an override.
  bool explicitly_set(const std::string& key) const { return explicit_.contains(key); }

  std::string get_string(const std::string& key) const { return get(key); }
  std::size_t get_size(const std::string& key) const;
  std::uint64_t get_u64(const std::string& key) const;
  double get_double(const std::string& key) const;
  bool get_bool(const std::string& key) const;
  // Path value; throws kConfig naming the key when unset.
  const std::string& require(const std::string& key) const;

  ModelConfig model_config() const;
  TrainingConfig training_config() const;
  EvalMode eval_mode() const;

  // Every key in sorted order, loadable by load_file.
  std::string dump() const;

 private:
  std::map<std::string, std::string> values_;
  std::set<std::string> explicit_;
};

}  // namespace cpg
