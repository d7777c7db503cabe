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

#include "cpg/checkpoint.hpp"

#include <charconv>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "cpg/error.hpp"

namespace cpg {
namespace {

std::string format_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

const std::string& entry(const std::map<std::string, std::string>& m, const std::string& key) {
  auto it = m.find(key);
  if (it == m.end()) fail(ErrorCategory::kParse, "checkpoint: missing config key '" + key + "'");
  return it->second;
}

std::size_t to_size(const std::string& s, const std::string& key) {
  std::size_t v = 0;
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
    fail(ErrorCategory::kParse, "checkpoint: bad integer for '" + key + "'");
  }
  return v;
}

double to_double(const std::string& s, const std::string& key) {
  double v = 0;
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
    fail(ErrorCategory::kParse, "checkpoint: bad number for '" + key + "'");
  }
  return v;
}

void expect_line(std::istream& in, const std::string& expected) {
  std::string line;
  if (!std::getline(in, line) || line != expected) {
    fail(ErrorCategory::kParse, "checkpoint: expected '" + expected + "'");
  }
}

}  // namespace

std::map<std::string, std::string> model_config_entries(const ModelConfig& c) {
  return {
      {"vocab_size", std::to_string(c.vocab_size)},
      {"embedding_dim", std::to_string(c.embedding_dim)},
      {"hidden_dim", std::to_string(c.hidden_dim)},
      {"encoder_layers", std::to_string(c.encoder_layers)},
      {"k", std::to_string(c.concept_k)},
      {"gamma", format_double(c.gamma)},
      {"selection", selection_name(c.selection)},
      {"use_concepts", c.use_concepts ? "true" : "false"},
      {"init_scale", format_double(c.init_scale)},
  };
}

ModelConfig model_config_from_entries(const std::map<std::string, std::string>& m) {
  ModelConfig c;
  c.vocab_size = to_size(entry(m, "vocab_size"), "vocab_size");
  c.embedding_dim = to_size(entry(m, "embedding_dim"), "embedding_dim");
  c.hidden_dim = to_size(entry(m, "hidden_dim"), "hidden_dim");
  c.encoder_layers = to_size(entry(m, "encoder_layers"), "encoder_layers");
  c.concept_k = to_size(entry(m, "k"), "k");
  c.gamma = to_double(entry(m, "gamma"), "gamma");
  c.selection = parse_selection(entry(m, "selection"));
  c.use_concepts = entry(m, "use_concepts") == "true";
  c.init_scale = to_double(entry(m, "init_scale"), "init_scale");
  return c;
}

void save_checkpoint(const std::string& path, const Checkpoint& ck) {
  const std::filesystem::path target(path);
  if (target.has_parent_path()) std::filesystem::create_directories(target.parent_path());
  // Write-then-rename so a crash never leaves a truncated checkpoint behind.
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::trunc);
    if (!out) fail(ErrorCategory::kIo, "cannot write checkpoint '" + tmp + "'");
    out << kCheckpointHeader << '\n' << "[config]\n";
    for (const auto& [k, v] : model_config_entries(ck.config)) out << k << '=' << v << '\n';
    out << "[vocab]\n" << ck.vocab.size() << '\n';
    for (const std::string& t : ck.vocab.tokens()) out << t << '\n';
    out << "[state]\niteration=" << ck.iteration << '\n';
    out << "[params]\n";
    write_tensor_map(out, ck.params);
    out << "[optimizer]\n";
    write_tensor_map(out, ck.accumulators);
    if (!out) fail(ErrorCategory::kIo, "failed writing checkpoint '" + tmp + "'");
  }
  std::filesystem::rename(tmp, target);
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCategory::kIo, "cannot open checkpoint '" + path + "'");
  expect_line(in, kCheckpointHeader);
  expect_line(in, "[config]");
  std::map<std::string, std::string> entries;
  std::string line;
  while (std::getline(in, line) && line != "[vocab]") {
    const auto eq = line.find('=');
    if (eq == std::string::npos) fail(ErrorCategory::kParse, "checkpoint: bad config line '" + line + "'");
    entries[line.substr(0, eq)] = line.substr(eq + 1);
  }
  if (line != "[vocab]") fail(ErrorCategory::kParse, "checkpoint: missing [vocab]");
  Checkpoint ck;
  ck.config = model_config_from_entries(entries);
  std::getline(in, line);
  const std::size_t n = to_size(line, "vocab count");
  std::vector<std::string> tokens(n);
  for (auto& t : tokens) {
    if (!std::getline(in, t)) fail(ErrorCategory::kParse, "checkpoint: truncated vocabulary");
  }
  ck.vocab = Vocabulary::from_tokens(std::move(tokens));
  if (ck.vocab.size() != ck.config.vocab_size) fail(ErrorCategory::kMismatch, "checkpoint: vocabulary size disagrees with config");
  expect_line(in, "[state]");
  std::getline(in, line);
  if (line.rfind("iteration=", 0) != 0) fail(ErrorCategory::kParse, "checkpoint: missing iteration");
  ck.iteration = to_size(line.substr(10), "iteration");
  expect_line(in, "[params]");
  ck.params = read_tensor_map(in);
  expect_line(in, "[optimizer]");
  ck.accumulators = read_tensor_map(in);
  return ck;
}

Model restore_model(const Checkpoint& ck) {
  Model model(ck.config);
  auto& tensors = model.params().tensors();
  if (tensors.size() != ck.params.size()) {
    fail(ErrorCategory::kMismatch, "checkpoint: holds " + std::to_string(ck.params.size()) + " parameters, model expects " +
                                       std::to_string(tensors.size()));
  }
  for (auto& [name, t] : tensors) {
    auto it = ck.params.find(name);
    if (it == ck.params.end()) fail(ErrorCategory::kMismatch, "checkpoint: missing parameter '" + name + "'");
    if (it->second.shape() != t.shape()) {
      fail(ErrorCategory::kMismatch, "checkpoint: parameter '" + name + "' has shape " + shape_string(it->second.shape()) +
                                         ", model expects " + shape_string(t.shape()));
    }
    t = it->second;
  }
  return model;
}

}  // namespace cpg
