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


#include "cpg/cpg.h"

#include <algorithm>
#include <cstdio>
#include <cstring>
#include <iostream>
#include <mutex>
#include <new>
#include <string>

#include "cpg/commands.hpp"
#include "cpg/concepts.hpp"
#include "cpg/config.hpp"
#include "cpg/error.hpp"
#include "cpg/evaluation.hpp"

struct cpg_config {
  cpg::RunConfig config;
};

struct cpg_concept_graph {
  cpg::ConceptGraph graph;
};

namespace {

thread_local std::string last_error;

template <typename F>
cpg_status guarded(F&& body) {
  last_error.clear();
  try {
    body();
    return CPG_OK;
  } catch (const cpg::Error& e) {
    last_error = e.what();
    return static_cast<cpg_status>(e.category());
  } catch (const std::bad_alloc&) {
    last_error = "out of memory";
    return CPG_INTERNAL;
  } catch (const std::exception& e) {
    last_error = e.what();
    return CPG_INTERNAL;
  }
}

// Commands log through the library logger; set it up on first use so that
// CPG_LOG_LEVEL applies even when cpg_init_logging was never called.
void ensure_logging() {
  static std::once_flag once;
  std::call_once(once, [] { cpg::configure_logging(); });
}

void require(bool ok, const char* what) {
  if (!ok) cpg::fail(cpg::ErrorCategory::kInvalidArgument, std::string(what) + " must not be null");
}

}  // namespace

extern "C" {

const char* cpg_version(void) { return "0.1.0"; }

const char* cpg_status_name(cpg_status status) {
  if (status == CPG_OK) return "ok";
  return cpg::category_name(static_cast<cpg::ErrorCategory>(status));
}

const char* cpg_last_error(void) { return last_error.c_str(); }

void cpg_init_logging(void) {
  try {
    cpg::configure_logging();
  } catch (...) {
  }
}

cpg_status cpg_config_new(const char* profile, cpg_config** out) {
  return guarded([&] {
    require(out != nullptr, "out");
    *out = nullptr;
    const cpg::Profile p = profile ? cpg::parse_profile(profile) : cpg::Profile::kDesk;
    *out = new cpg_config{cpg::RunConfig(p)};
  });
}

void cpg_config_free(cpg_config* config) { delete config; }

size_t cpg_config_key_count(void) { return cpg::RunConfig::keys().size(); }

const char* cpg_config_key(size_t index) {
  const auto& keys = cpg::RunConfig::keys();
  return index < keys.size() ? keys[index].c_str() : nullptr;
}

cpg_status cpg_config_set(cpg_config* config, const char* key, const char* value) {
  return guarded([&] {
    require(config && key && value, "config, key and value");
    config->config.set(key, value);
  });
}

cpg_status cpg_config_load(cpg_config* config, const char* path) {
  return guarded([&] {
    require(config && path, "config and path");
    config->config.load_file(path);
  });
}

cpg_status cpg_config_get(const cpg_config* config, const char* key, char* buf, size_t cap, size_t* len) {
  return guarded([&] {
    require(config && key, "config and key");
    const std::string& v = config->config.get(key);
    if (len) *len = v.size();
    if (buf && cap > v.size()) std::memcpy(buf, v.c_str(), v.size() + 1);
  });
}

cpg_status cpg_train(const cpg_config* config, size_t* iterations_done) {
  return guarded([&] {
    ensure_logging();
    require(config != nullptr, "config");
    const cpg::TrainSummary s = cpg::cmd_train(config->config);
    if (iterations_done) *iterations_done = s.last_iteration;
  });
}

cpg_status cpg_label_ds(const cpg_config* config) {
  return guarded([&] {
    ensure_logging();
    require(config != nullptr, "config");
    cpg::cmd_label_ds(config->config);
  });
}

cpg_status cpg_decode(const cpg_config* config) {
  return guarded([&] {
    ensure_logging();
    require(config != nullptr, "config");
    cpg::cmd_decode(config->config);
  });
}

cpg_status cpg_evaluate(const cpg_config* config) {
  return guarded([&] {
    ensure_logging();
    require(config != nullptr, "config");
    cpg::cmd_eval(config->config, std::cout);
    std::cout.flush();
  });
}

cpg_status cpg_concepts(const cpg_config* config, const char* word) {
  return guarded([&] {
    ensure_logging();
    require(config && word, "config and word");
    cpg::cmd_concepts(config->config, word, std::cout);
    std::cout.flush();
  });
}

cpg_status cpg_concept_graph_load(const char* path, cpg_concept_graph** out) {
  return guarded([&] {
    require(path && out, "path and out");
    *out = nullptr;
    *out = new cpg_concept_graph{cpg::ConceptGraph::load(path)};
  });
}

void cpg_concept_graph_free(cpg_concept_graph* graph) { delete graph; }

cpg_status cpg_concept_graph_candidates(const cpg_concept_graph* graph, const char* word, size_t k,
                                        const char** concepts, double* priors, size_t cap, size_t* count) {
  return guarded([&] {
    require(graph && word && count, "graph, word and count");
    const auto entries = graph->graph.lookup(cpg::join_words(word));
    const size_t n = std::min(entries.size(), k);
    *count = n;
    for (size_t i = 0; i < n && i < cap; ++i) {
      if (concepts) concepts[i] = entries[i].concept_token.c_str();
      if (priors) priors[i] = entries[i].prior;
    }
  });
}

cpg_status cpg_rouge(const char* candidate, const char* reference, size_t n, double* precision, double* recall,
                     double* f1) {
  return guarded([&] {
    require(candidate && reference, "candidate and reference");
    const cpg::TokenSeq cand = cpg::tokenize(candidate);
    const cpg::TokenSeq ref = cpg::tokenize(reference);
    const std::span<const cpg::TokenSeq> refs(&ref, 1);
    const cpg::RougeScore s = n == 0 ? cpg::rouge_l(cand, refs) : cpg::rouge_n(cand, refs, n);
    if (precision) *precision = s.precision;
    if (recall) *recall = s.recall;
    if (f1) *f1 = s.f1;
  });
}

cpg_status cpg_oov_rate(size_t unk, size_t total, char* buf, size_t cap) {
  return guarded([&] {
    require(buf != nullptr, "buf");
    const std::string s = cpg::oov_rate(unk, total).formatted();
    if (cap <= s.size()) cpg::fail(cpg::ErrorCategory::kInvalidArgument, "buffer too small");
    std::memcpy(buf, s.c_str(), s.size() + 1);
  });
}

}  // extern "C"
