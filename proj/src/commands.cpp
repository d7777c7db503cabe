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


#include "cpg/commands.hpp"

#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <memory>
#include <mutex>
#include <optional>
#include <sstream>

#include "cpg/checkpoint.hpp"
#include "cpg/concepts.hpp"
#include "cpg/decoding.hpp"
#include "cpg/error.hpp"
#include "cpg/random.hpp"

namespace cpg {
namespace {

namespace fs = std::filesystem;

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorCategory::kIo, "cannot write '" + path + "'");
  out << text;
  if (!out) fail(ErrorCategory::kIo, "write failed for '" + path + "'");
}

// Shortest text that reads back to the same double.
std::string fmt_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

std::optional<ConceptGraph> load_graph(const RunConfig& config, bool use_concepts) {
  if (!use_concepts) return std::nullopt;
  return ConceptGraph::load(config.require("concepts"));
}

// Explicit model keys must agree with what the checkpoint was trained with.
// Keys in `free` may differ.
void check_model_matches(const RunConfig& config, const ModelConfig& trained,
                         std::initializer_list<std::string_view> free = {}) {
  const auto want = model_config_entries(config.model_config());
  const auto have = model_config_entries(trained);
  for (const auto& [key, value] : want) {
    if (key == "vocab_size" || key == "init_scale" || !config.explicitly_set(key)) continue;
    if (std::find(free.begin(), free.end(), key) != free.end()) continue;
    const auto it = have.find(key);
    if (it != have.end() && it->second != value) {
      fail(ErrorCategory::kMismatch,
           "config key '" + key + "' is " + value + " but the checkpoint was trained with " + it->second);
    }
  }
}

std::vector<Example> prepare_corpus(std::span<const DocumentPair> pairs, const Vocabulary& vocab,
                                    const ConceptGraph* graph, std::size_t k) {
  std::vector<Example> out;
  out.reserve(pairs.size());
  for (const DocumentPair& p : pairs) out.push_back(prepare_example(p, vocab, graph, k));
  return out;
}

std::vector<TokenSeq> nonblank_documents(const std::string& path) {
  std::vector<TokenSeq> docs;
  for (const std::string& line : read_lines(path)) {
    TokenSeq t = tokenize(line);
    if (!t.empty()) docs.push_back(std::move(t));
  }
  if (docs.empty()) fail(ErrorCategory::kInvalidArgument, "test set '" + path + "' is empty");
  return docs;
}

std::vector<DsLabel> read_labels(const std::string& path) {
  std::vector<DsLabel> labels;
  const auto lines = read_lines(path);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    std::istringstream in(lines[i]);
    std::size_t index = 0;
    DsLabel label;
    if (!(in >> index >> label.mean_kl >> label.weight) || index != labels.size()) {
      fail(ErrorCategory::kParse, path + ":" + std::to_string(i + 1) + ": expected pair, mean KL and weight");
    }
    labels.push_back(label);
  }
  return labels;
}

std::string checkpoint_name(std::size_t iteration) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "ckpt-%08zu.cpg", iteration);
  return buf;
}

}  // namespace

void configure_logging() {
  static std::once_flag created;
  std::call_once(created, [] {
    auto logger = spdlog::stderr_color_mt("cpg");
    logger->set_pattern("[%l] %v");
    spdlog::set_default_logger(logger);
  });
  const char* env = std::getenv("CPG_LOG_LEVEL");
  spdlog::set_level(env ? spdlog::level::from_str(env) : spdlog::level::info);
}

TrainSummary cmd_train(const RunConfig& config) {
  ModelConfig mc = config.model_config();
  const TrainingConfig tc = config.training_config();
  const std::vector<DocumentPair> pairs = read_parallel_corpus(config.require("train_source"), config.require("train_target"));
  const fs::path dir = config.require("checkpoint_dir");
  fs::create_directories(dir);

  Vocabulary vocab;
  std::unique_ptr<Model> model;
  std::optional<Checkpoint> resumed;
  if (config.has("resume")) {
    resumed = load_checkpoint(config.get("resume"));
    check_model_matches(config, resumed->config);
    mc = resumed->config;
    vocab = resumed->vocab;
    model = std::make_unique<Model>(restore_model(*resumed));
  }
  const std::optional<ConceptGraph> graph = load_graph(config, mc.use_concepts);
  if (!resumed) {
    std::vector<TokenSeq> text;
    for (const DocumentPair& p : pairs) {
      text.push_back(p.source);
      text.push_back(p.reference);
    }
    vocab = Vocabulary::build(text, mc.vocab_size);
    if (graph && config.get_bool("concept_vocab")) add_concept_tokens(vocab, *graph, mc.concept_k, mc.vocab_size);
    mc.vocab_size = vocab.size();
    model = std::make_unique<Model>(mc);
    model->initialize(tc.seed);
  }
  spdlog::info("vocabulary {} tokens, {} training pairs", vocab.size(), pairs.size());
  const std::vector<Example> corpus = prepare_corpus(pairs, vocab, graph ? &*graph : nullptr, mc.concept_k);

  Trainer trainer(*model, tc);
  if (resumed) {
    for (const auto& [name, acc] : trainer.optimizer().accumulators()) {
      const auto it = resumed->accumulators.find(name);
      if (it == resumed->accumulators.end() || it->second.shape() != acc.shape()) {
        fail(ErrorCategory::kMismatch, "checkpoint optimizer state lacks '" + name + "'");
      }
    }
    trainer.optimizer().accumulators() = resumed->accumulators;
    trainer.set_iteration(resumed->iteration);
  }
  if (config.has("labels_file")) {
    trainer.set_ds_labels(read_labels(config.get("labels_file")));
  } else if (config.has("test_source")) {
    const std::string test_path = config.get("test_source");
    trainer.set_ds_labeler([&, test_path](const Model& m) {
      std::vector<TokenSeq> refs;
      for (const DocumentPair& p : pairs) refs.push_back(p.reference);
      spdlog::info("labelling {} pairs against {}", refs.size(), test_path);
      return label_corpus(refs, nonblank_documents(test_path), vocab, m.params().get("embedding"), tc);
    });
  }

  write_file((dir / "run.cfg").string(), config.dump());
  const std::string log_path = config.has("log_file") ? config.get("log_file") : (dir / "train.log").string();
  std::string kept;
  if (resumed && fs::exists(log_path)) {
    // Drop entries past the resumed iteration so the log stays continuous.
    for (const std::string& line : read_lines(log_path)) {
      std::size_t it = 0;
      if (std::sscanf(line.c_str(), "%zu", &it) == 1 && it <= resumed->iteration) kept += line + '\n';
    }
  }
  std::ofstream log(log_path, std::ios::trunc);
  log << kept;
  if (!log) fail(ErrorCategory::kIo, "cannot write '" + log_path + "'");

  TrainSummary summary;
  summary.first_iteration = trainer.iteration();
  const std::size_t every = config.get_size("checkpoint_every");
  const std::size_t total = trainer.total_iterations();
  auto save = [&](std::size_t iteration) {
    Checkpoint ck{mc, vocab, model->params().tensors(), trainer.optimizer().accumulators(), iteration};
    const fs::path path = dir / checkpoint_name(iteration);
    save_checkpoint(path.string(), ck);
    save_checkpoint((dir / "latest.cpg").string(), ck);
    summary.last_checkpoint = path.string();
    spdlog::info("saved {}", path.string());
  };
  trainer.run(corpus, [&](const IterationRecord& r) {
    log << r.iteration << '\t' << phase_name(r.phase) << '\t' << fmt_double(r.loss) << '\n';
    log.flush();
    spdlog::debug("iteration {} {} loss {}", r.iteration, phase_name(r.phase), r.loss);
    if ((every && r.iteration % every == 0) || r.iteration == total) save(r.iteration);
  });
  if (summary.last_checkpoint.empty()) save(trainer.iteration());
  summary.last_iteration = trainer.iteration();
  return summary;
}

void cmd_label_ds(const RunConfig& config) {
  const Checkpoint ck = load_checkpoint(config.require("checkpoint"));
  const std::string out_path = config.require("labels_file");
  std::vector<TokenSeq> refs;
  for (const std::string& line : read_lines(config.require("train_target"))) refs.push_back(tokenize(line));
  const std::vector<TokenSeq> tests = nonblank_documents(config.require("test_source"));
  const auto it = ck.params.find("embedding");
  if (it == ck.params.end()) fail(ErrorCategory::kMismatch, "checkpoint has no embedding");
  TrainingConfig tc = config.training_config();
  const std::vector<DsLabel> labels = label_corpus(refs, tests, ck.vocab, it->second, tc);
  std::ostringstream out;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    out << i << '\t' << fmt_double(labels[i].mean_kl) << '\t' << fmt_double(labels[i].weight) << '\n';
  }
  write_file(out_path, out.str());
  spdlog::info("wrote {} labels to {}", labels.size(), out_path);
}

void cmd_decode(const RunConfig& config) {
  Checkpoint ck = load_checkpoint(config.require("checkpoint"));
  // Concept selection only steers decoding, so it may change after training.
  check_model_matches(config, ck.config, {"selection"});
  if (config.explicitly_set("selection")) ck.config.selection = parse_selection(config.get("selection"));
  const Model model = restore_model(ck);
  const std::optional<ConceptGraph> graph = load_graph(config, ck.config.use_concepts);
  const std::string decoder = config.get("decoder");
  if (decoder != "beam" && decoder != "greedy") {
    fail(ErrorCategory::kConfig, "decoder must be 'beam' or 'greedy', got '" + decoder + "'");
  }
  const std::size_t beam = config.get_size("beam_size");
  const std::size_t max_len = config.get_size("max_decode_len");
  const std::uint64_t seed = config.get_u64("seed");
  const std::vector<std::string> lines = read_lines(config.require("input"));
  std::ostringstream out;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const Example ex = prepare_example({tokenize(lines[i]), {}}, ck.vocab, graph ? &*graph : nullptr, ck.config.concept_k);
    std::mt19937_64 rng(mix_seed(seed, i));
    std::vector<TokenId> ids;
    if (ex.encoded.source_ids.empty()) {
      // nothing to attend over
    } else if (decoder == "greedy") {
      ids = greedy_decode(model, ex, max_len, &rng);
    } else {
      ids = beam_search(model, ex, beam, max_len, &rng).summary();
    }
    out << detokenize(ids, ex.vocab) << '\n';
  }
  write_file(config.require("output"), out.str());
  spdlog::info("decoded {} lines", lines.size());
}

EvalReport cmd_eval(const RunConfig& config, std::ostream& out) {
  const std::vector<std::string> summaries = read_lines(config.require("summaries"));
  std::vector<std::vector<std::string>> references;
  for (const std::string& line : read_lines(config.require("references"))) {
    std::vector<std::string> refs;
    std::istringstream in(line);
    std::string ref;
    while (std::getline(in, ref, '\t')) refs.push_back(ref);
    if (refs.empty()) refs.emplace_back();
    references.push_back(std::move(refs));
  }
  std::vector<std::string> sources;
  if (config.has("sources")) sources = read_lines(config.get("sources"));
  const EvalReport report = evaluate(summaries, references, sources, config.eval_mode());
  const std::string table = format_report_table(report);
  out << table;
  if (config.has("report_table")) write_file(config.get("report_table"), table);
  if (config.has("report_kv")) write_file(config.get("report_kv"), format_report_kv(report));
  return report;
}

void cmd_concepts(const RunConfig& config, const std::string& word, std::ostream& out) {
  const ConceptGraph graph = ConceptGraph::load(config.require("concepts"));
  const std::size_t k = config.get_size("k");
  if (k == 0) fail(ErrorCategory::kConfig, "k must be positive");
  for (const ConceptEntry& e : graph.candidates(join_words(word), k)) {
    out << e.concept_token << '\t' << fmt_double(e.prior) << '\n';
  }
}

}  // namespace cpg
