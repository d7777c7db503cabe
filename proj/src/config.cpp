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


#include "cpg/config.hpp"

#include <charconv>
#include <sstream>

#include "cpg/corpus.hpp"
#include "cpg/error.hpp"

namespace cpg {
namespace {

const std::map<std::string, std::string>& full_defaults() {
  static const std::map<std::string, std::string> d = {
      {"profile", "full"},
      // model
      {"vocab_size", "150000"},
      {"embedding_dim", "128"},
      {"hidden_dim", "256"},
      {"encoder_layers", "2"},
      {"k", "3"},
      {"gamma", "0.1"},
      {"selection", "argmax"},
      {"use_concepts", "true"},
      {"concept_vocab", "true"},
      {"init_scale", "0.1"},
      // training
      {"lambda", "0.99"},
      {"pi", "1.68"},
      {"learning_rate", "0.15"},
      {"accumulator_init", "0.1"},
      {"clip_norm", "2"},
      {"batch_size", "64"},
      {"max_decode_len", "30"},
      {"seed", "1"},
      {"shuffle", "true"},
      {"ds_binary", "false"},
      {"ds_threshold", "0"},
      {"phases", "mle:1000"},
      {"checkpoint_every", "100"},
      // decoding
      {"beam_size", "8"},
      {"decoder", "beam"},
      // evaluation
      {"eval_mode", "f1"},
      // paths
      {"train_source", ""},
      {"train_target", ""},
      {"concepts", ""},
      {"test_source", ""},
      {"checkpoint_dir", ""},
      {"checkpoint", ""},
      {"resume", ""},
      {"log_file", ""},
      {"labels_file", ""},
      {"input", ""},
      {"output", ""},
      {"summaries", ""},
      {"references", ""},
      {"sources", ""},
      {"report_table", ""},
      {"report_kv", ""},
  };
  return d;
}

[[noreturn]] void bad_value(const std::string& key, const std::string& value, const char* what) {
  fail(ErrorCategory::kConfig, "config key '" + key + "': expected " + what + ", got '" + value + "'");
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

}  // namespace

Profile parse_profile(const std::string& name) {
  if (name == "full") return Profile::kFull;
  if (name == "desk") return Profile::kDesk;
  fail(ErrorCategory::kConfig, "profile must be 'full' or 'desk', got '" + name + "'");
}

RunConfig::RunConfig(Profile profile) : values_(full_defaults()) {
  if (profile == Profile::kDesk) {
    values_["profile"] = "desk";
    values_["hidden_dim"] = "32";
    values_["embedding_dim"] = "16";
    values_["vocab_size"] = "200";
  }
}

bool RunConfig::known(const std::string& key) { return full_defaults().contains(key); }

const std::vector<std::string>& RunConfig::keys() {
  static const std::vector<std::string> all = [] {
    std::vector<std::string> out;
    for (const auto& [k, v] : full_defaults()) out.push_back(k);
    return out;
  }();
  return all;
}

void RunConfig::set(const std::string& key, const std::string& value) {
  if (!known(key)) fail(ErrorCategory::kConfig, "unknown config key '" + key + "'");
  if (key == "profile") {
    // Switching profile resets the profile-dependent keys not set explicitly.
    const RunConfig base(parse_profile(value));
    for (const auto& [k, v] : base.values_) {
      if (!explicit_.contains(k)) values_[k] = v;
    }
  }
  values_[key] = value;
  explicit_.insert(key);
}

void RunConfig::load_file(const std::string& path) {
  const std::vector<std::string> lines = read_lines(path);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    std::string line = lines[i];
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      fail(ErrorCategory::kParse, path + ":" + std::to_string(i + 1) + ": expected key = value");
    }
    const std::string key = trim(line.substr(0, eq));
    if (!known(key)) {
      fail(ErrorCategory::kConfig, path + ":" + std::to_string(i + 1) + ": unknown config key '" + key + "'");
    }
    set(key, trim(line.substr(eq + 1)));
  }
}

const std::string& RunConfig::get(const std::string& key) const {
  const auto it = values_.find(key);
  if (it == values_.end()) fail(ErrorCategory::kConfig, "unknown config key '" + key + "'");
  return it->second;
}

std::size_t RunConfig::get_size(const std::string& key) const {
  return static_cast<std::size_t>(get_u64(key));
}

std::uint64_t RunConfig::get_u64(const std::string& key) const {
  const std::string& v = get(key);
  std::uint64_t out = 0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size() || v.empty()) bad_value(key, v, "a non-negative integer");
  return out;
}

double RunConfig::get_double(const std::string& key) const {
  const std::string& v = get(key);
  double out = 0.0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size() || v.empty()) bad_value(key, v, "a number");
  return out;
}

bool RunConfig::get_bool(const std::string& key) const {
  const std::string& v = get(key);
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  bad_value(key, v, "true or false");
}

const std::string& RunConfig::require(const std::string& key) const {
  const std::string& v = get(key);
  if (v.empty()) fail(ErrorCategory::kConfig, "config key '" + key + "' is required");
  return v;
}

ModelConfig RunConfig::model_config() const {
  ModelConfig m;
  m.vocab_size = get_size("vocab_size");
  m.embedding_dim = get_size("embedding_dim");
  m.hidden_dim = get_size("hidden_dim");
  m.encoder_layers = get_size("encoder_layers");
  m.concept_k = get_size("k");
  m.gamma = get_double("gamma");
  m.selection = parse_selection(get("selection"));
  m.use_concepts = get_bool("use_concepts");
  m.init_scale = get_double("init_scale");
  if (m.gamma < 0.0) fail(ErrorCategory::kConfig, "gamma must be non-negative");
  if (m.concept_k == 0) fail(ErrorCategory::kConfig, "k must be positive");
  if (m.embedding_dim == 0 || m.hidden_dim == 0 || m.encoder_layers == 0) {
    fail(ErrorCategory::kConfig, "model dimensions must be positive");
  }
  return m;
}

TrainingConfig RunConfig::training_config() const {
  TrainingConfig t;
  t.lambda = get_double("lambda");
  t.pi = get_double("pi");
  t.learning_rate = get_double("learning_rate");
  t.accumulator_init = get_double("accumulator_init");
  t.clip_norm = get_double("clip_norm");
  t.batch_size = get_size("batch_size");
  t.max_decode_len = get_size("max_decode_len");
  t.seed = get_u64("seed");
  t.shuffle = get_bool("shuffle");
  t.ds_binary = get_bool("ds_binary");
  t.ds_threshold = get_double("ds_threshold");
  if (t.ds_binary && !explicitly_set("ds_threshold")) {
    fail(ErrorCategory::kConfig, "ds_binary needs an explicit ds_threshold");
  }
  t.schedule = parse_schedule(get("phases"));
  validate(t);
  return t;
}

EvalMode RunConfig::eval_mode() const { return parse_eval_mode(get("eval_mode")); }

std::string RunConfig::dump() const {
  std::ostringstream out;
  for (const auto& [k, v] : values_) out << k << " = " << v << "\n";
  return out.str();
}

}  // namespace cpg
