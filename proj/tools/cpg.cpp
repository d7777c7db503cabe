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


// Command-line front end. Talks to the library only through the C interface.

#include <CLI11.hpp>

#include <cstdio>
#include <map>
#include <string>
#include <vector>

#include "cpg/cpg.h"

namespace {

int report(cpg_status status) {
  if (status == CPG_OK) return 0;
  std::fprintf(stderr, "error: %s: %s\n", cpg_status_name(status), cpg_last_error());
  return static_cast<int>(status);
}

std::string flag_for(std::string key) {
  for (char& c : key)
    if (c == '_') c = '-';
  return "--" + key;
}

}  // namespace

int main(int argc, char** argv) {
  cpg_init_logging();

  CLI::App app{"Concept pointer-generator summarizer"};
  app.require_subcommand(1);
  app.fallthrough();
  app.set_version_flag("--version", cpg_version());

  std::string profile = "desk";
  std::string config_file;
  std::vector<std::string> sets;
  app.add_option("--profile", profile, "Default profile: full or desk")->check(CLI::IsMember({"full", "desk"}));
  app.add_option("-c,--config", config_file, "key = value configuration file")->check(CLI::ExistingFile);
  app.add_option("-s,--set", sets, "Override as key=value (repeatable)");

  std::map<std::string, std::string> flags;
  for (size_t i = 0; i < cpg_config_key_count(); ++i) {
    const std::string key = cpg_config_key(i);
    if (key == "profile") continue;
    app.add_option(flag_for(key), flags[key], "Config key " + key)
        ->group("Config keys")
        ->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  }

  auto* train = app.add_subcommand("train", "Train through the phase schedule");
  auto* label = app.add_subcommand("label-ds", "Write distant-supervision labels for the training pairs");
  auto* decode = app.add_subcommand("decode", "Summarize each input line");
  auto* eval = app.add_subcommand("eval", "Score summaries against references");
  auto* concepts = app.add_subcommand("concepts", "Show the top-k concepts of a word");
  std::string word;
  concepts->add_option("word", word, "Instance word; spaces become underscores")->required();

  CLI11_PARSE(app, argc, argv);

  cpg_config* config = nullptr;
  if (int rc = report(cpg_config_new(profile.c_str(), &config))) return rc;
  auto run = [&]() -> cpg_status {
    if (!config_file.empty()) {
      if (cpg_status st = cpg_config_load(config, config_file.c_str())) return st;
    }
    for (const std::string& kv : sets) {
      const auto eq = kv.find('=');
      const std::string key = kv.substr(0, eq);
      const std::string value = eq == std::string::npos ? "" : kv.substr(eq + 1);
      if (cpg_status st = cpg_config_set(config, key.c_str(), value.c_str())) return st;
    }
    for (const auto& [key, value] : flags) {
      if (app.count(flag_for(key)) == 0) continue;
      if (cpg_status st = cpg_config_set(config, key.c_str(), value.c_str())) return st;
    }
    if (train->parsed()) {
      size_t done = 0;
      const cpg_status st = cpg_train(config, &done);
      if (st == CPG_OK) std::printf("trained to iteration %zu\n", done);
      return st;
    }
    if (label->parsed()) return cpg_label_ds(config);
    if (decode->parsed()) return cpg_decode(config);
    if (eval->parsed()) return cpg_evaluate(config);
    if (concepts->parsed()) return cpg_concepts(config, word.c_str());
    return CPG_INVALID_ARGUMENT;
  };
  const int rc = report(run());
  cpg_config_free(config);
  return rc;
}
