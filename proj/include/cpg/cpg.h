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


/* C interface to the cpg library.
 *
 * Every function that can fail returns a cpg_status. On failure the message of
 * the most recent error on the calling thread is available from
 * cpg_last_error() until the next call into the library on that thread.
 * Handles are opaque and owned by the caller; free them with the matching
 * *_free function. Passing NULL to a *_free function is a no-op. */

#ifndef CPG_CPG_H_
#define CPG_CPG_H_

#include <stddef.h>

#if defined(_WIN32)
#define CPG_API __declspec(dllexport)
#else
#define CPG_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum cpg_status {
  CPG_OK = 0,
  CPG_INVALID_ARGUMENT = 1,
  CPG_IO = 2,
  CPG_PARSE = 3,
  CPG_CONFIG = 4,
  CPG_MISMATCH = 5,
  CPG_NUMERIC = 6,
  CPG_SHAPE = 7,
  CPG_INTERNAL = 99
} cpg_status;

typedef struct cpg_config cpg_config;
typedef struct cpg_concept_graph cpg_concept_graph;

CPG_API const char* cpg_version(void);
/* Short lowercase name such as "io" or "mismatch". */
CPG_API const char* cpg_status_name(cpg_status status);
CPG_API const char* cpg_last_error(void);

/* Log verbosity from the CPG_LOG_LEVEL environment variable. */
CPG_API void cpg_init_logging(void);

/* profile is "full" or "desk"; NULL means "desk". */
CPG_API cpg_status cpg_config_new(const char* profile, cpg_config** out);
CPG_API void cpg_config_free(cpg_config* config);
/* Every configuration key, in sorted order. */
CPG_API size_t cpg_config_key_count(void);
CPG_API const char* cpg_config_key(size_t index);
CPG_API cpg_status cpg_config_set(cpg_config* config, const char* key, const char* value);
CPG_API cpg_status cpg_config_load(cpg_config* config, const char* path);
/* Copies the value into buf (NUL-terminated) and stores the full length in
 * *len. A NULL or short buffer only reports the length. */
CPG_API cpg_status cpg_config_get(const cpg_config* config, const char* key, char* buf, size_t cap, size_t* len);

/* Subcommands. Output files are named by config keys. */
CPG_API cpg_status cpg_train(const cpg_config* config, size_t* iterations_done);
CPG_API cpg_status cpg_label_ds(const cpg_config* config);
CPG_API cpg_status cpg_decode(const cpg_config* config);
/* Prints the report table on stdout. */
CPG_API cpg_status cpg_evaluate(const cpg_config* config);
/* Prints "concept<TAB>prior" lines for the top-k concepts of word on stdout. */
CPG_API cpg_status cpg_concepts(const cpg_config* config, const char* word);

CPG_API cpg_status cpg_concept_graph_load(const char* path, cpg_concept_graph** out);
CPG_API void cpg_concept_graph_free(cpg_concept_graph* graph);
/* Fills up to cap entries with the top-k concepts of word, most probable
 * first; *count receives the number available. Strings stay valid while the
 * graph lives. */
CPG_API cpg_status cpg_concept_graph_candidates(const cpg_concept_graph* graph, const char* word, size_t k,
                                                const char** concepts, double* priors, size_t cap, size_t* count);

/* ROUGE between whitespace-tokenized strings; n = 0 selects ROUGE-L. */
CPG_API cpg_status cpg_rouge(const char* candidate, const char* reference, size_t n, double* precision,
                             double* recall, double* f1);
/* Writes "x.xx%" into buf. */
CPG_API cpg_status cpg_oov_rate(size_t unk, size_t total, char* buf, size_t cap);

#ifdef __cplusplus
}
#endif

#endif  // CPG_CPG_H_
