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

#include <cstddef>
#include <map>
#include <string>

#include "cpg/corpus.hpp"
#include "cpg/model.hpp"
#include "cpg/tensor.hpp"

namespace cpg {

inline constexpr const char* kCheckpointHeader = "CPG-CHECKPOINT v1";

/// Everything needed to resume training or decode: model dimensions, the
/// vocabulary the embedding rows refer to, weights, Adagrad accumulators and
/// the iteration counter.
struct Checkpoint {
  ModelConfig config;
  Vocabulary vocab;
  TensorMap params;
  TensorMap accumulators;
  std::size_t iteration = 0;
};

std::map<std::string, std::string> model_config_entries(const ModelConfig& config);
ModelConfig model_config_from_entries(const std::map<std::string, std::string>& entries);

void save_checkpoint(const std::string& path, const Checkpoint& checkpoint);
Checkpoint load_checkpoint(const std::string& path);

// Copies checkpoint weights into a model built from checkpoint.config.
Model restore_model(const Checkpoint& checkpoint);

}  // namespace cpg
