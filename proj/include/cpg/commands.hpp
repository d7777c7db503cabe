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


// The subcommands behind the command-line tool. Each reads its inputs from a
// RunConfig, writes the files it names, and reports failures as cpg::Error.

#pragma once

#include <ostream>
#include <string>

#include "cpg/config.hpp"

namespace cpg {

struct TrainSummary {
  std::size_t first_iteration = 0;  // iterations completed before this run
  std::size_t last_iteration = 0;
  std::string last_checkpoint;
};

// Runs the phase schedule and writes checkpoints, run.cfg and the loss log
// ("iteration<TAB>phase<TAB>loss" per update) under checkpoint_dir.
TrainSummary cmd_train(const RunConfig& config);

// Writes "pair<TAB>mean_kl<TAB>weight" per training pair to labels_file.
void cmd_label_ds(const RunConfig& config);

// One summary line per input line.
void cmd_decode(const RunConfig& config);

// Prints the table to `out` and writes the requested report files.
EvalReport cmd_eval(const RunConfig& config, std::ostream& out);

// Prints "concept<TAB>prior" for the top-k concepts of `word`.
void cmd_concepts(const RunConfig& config, const std::string& word, std::ostream& out);

// Applies the CPG_LOG_LEVEL environment variable (trace .. off) to the logger.
void configure_logging();

}  // namespace cpg
