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


// Drives the command-line tool as a subprocess against the toy fixtures.

#include <doctest.h>

#include <sys/wait.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "cpg/evaluation.hpp"
#include "support.hpp"

using namespace cpg;
using namespace cpg::testing;
namespace fs = std::filesystem;

namespace {

const std::string kCli = CPG_CLI_PATH;
const std::string kData = CPG_TEST_DATA;

struct Result {
  int code = -1;
  std::string out;
  std::string err;
};

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

std::vector<std::string> lines(const std::string& path) { return read_lines(path); }

std::string quote(const std::string& s) { return "'" + s + "'"; }

// Runs the tool with `args` (already shell-quoted where needed).
Result run(const TempDir& dir, const std::string& args, const std::string& env = "CPG_LOG_LEVEL=warn") {
  const std::string out = dir.file("stdout.txt"), err = dir.file("stderr.txt");
  const std::string cmd = env + " " + quote(kCli) + " " + args + " >" + quote(out) + " 2>" + quote(err);
  const int status = std::system(cmd.c_str());
  Result r;
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.out = slurp(out);
  r.err = slurp(err);
  return r;
}

std::string data_args() {
  return "-c " + quote(kData + "/toy.cfg") + " --train-source " + quote(kData + "/train.src") + " --train-target " +
         quote(kData + "/train.tgt") + " --concepts " + quote(kData + "/concepts.tsv") + " --test-source " +
         quote(kData + "/test.src");
}

std::string train_args(const std::string& ckdir) { return "train " + data_args() + " --checkpoint-dir " + quote(ckdir); }

std::string decode_args(const std::string& ckpt, const std::string& output) {
  return "decode " + data_args() + " --checkpoint " + quote(ckpt) + " --input " + quote(kData + "/test.src") +
         " --output " + quote(output);
}

}  // namespace

TEST_CASE("a training smoke run writes checkpoints, config and log") {
  TempDir dir("cpg_cli");
  const std::string ck = dir.file("ck");
  const Result r = run(dir, train_args(ck) + " --phases mle:80,rl-mixed:10,ds:10 --checkpoint-every 25");
  REQUIRE_MESSAGE(r.code == 0, r.err);
  CHECK(r.out == "trained to iteration 100\n");
  for (const char* f : {"ckpt-00000025.cpg", "ckpt-00000050.cpg", "ckpt-00000100.cpg", "latest.cpg", "run.cfg"}) {
    CAPTURE(f);
    CHECK(fs::exists(ck + "/" + f));
  }
  const std::vector<std::string> log = lines(ck + "/train.log");
  REQUIRE(log.size() == 100);
  CHECK(log.front().rfind("1\tmle\t", 0) == 0);
  CHECK(log[80].rfind("81\trl-mixed\t", 0) == 0);
  CHECK(log.back().rfind("100\tds\t", 0) == 0);
  CHECK(slurp(ck + "/run.cfg").find("phases = mle:80,rl-mixed:10,ds:10") != std::string::npos);
}

TEST_CASE("the same seed reproduces the loss log") {
  TempDir dir("cpg_cli");
  REQUIRE(run(dir, train_args(dir.file("a"))).code == 0);
  REQUIRE(run(dir, train_args(dir.file("b"))).code == 0);
  REQUIRE(run(dir, train_args(dir.file("c")) + " --seed 2").code == 0);
  const std::string a = slurp(dir.file("a/train.log"));
  CHECK_FALSE(a.empty());
  CHECK(a == slurp(dir.file("b/train.log")));
  CHECK(a != slurp(dir.file("c/train.log")));
  CHECK(slurp(dir.file("a/latest.cpg")) == slurp(dir.file("b/latest.cpg")));
}

TEST_CASE("a resumed run continues the iteration counter and the losses") {
  TempDir dir("cpg_cli");
  REQUIRE(run(dir, train_args(dir.file("full"))).code == 0);
  const Result r = run(dir, train_args(dir.file("resumed")) + " --resume " + quote(dir.file("full/ckpt-00000004.cpg")));
  REQUIRE_MESSAGE(r.code == 0, r.err);
  CHECK(r.out == "trained to iteration 10\n");
  const std::vector<std::string> full = lines(dir.file("full/train.log"));
  const std::vector<std::string> resumed = lines(dir.file("resumed/train.log"));
  REQUIRE(full.size() == 10);
  REQUIRE(resumed.size() == 6);
  CHECK(resumed.front().rfind("5\t", 0) == 0);
  CHECK(std::vector<std::string>(full.begin() + 4, full.end()) == resumed);
  CHECK(slurp(dir.file("full/latest.cpg")) == slurp(dir.file("resumed/latest.cpg")));

  // Resuming in place keeps the log lines up to the checkpoint.
  REQUIRE(run(dir, train_args(dir.file("full")) + " --resume " + quote(dir.file("full/ckpt-00000008.cpg"))).code == 0);
  CHECK(lines(dir.file("full/train.log")) == full);
}

TEST_CASE("resuming with different model settings is refused") {
  TempDir dir("cpg_cli");
  REQUIRE(run(dir, train_args(dir.file("a"))).code == 0);
  const Result r =
      run(dir, train_args(dir.file("b")) + " --hidden-dim 9 --resume " + quote(dir.file("a/latest.cpg")));
  CHECK(r.code == 5);
  CHECK(r.err.rfind("error: mismatch: ", 0) == 0);
}

TEST_CASE("labels cover every pair and identical text gets full weight") {
  TempDir dir("cpg_cli");
  REQUIRE(run(dir, train_args(dir.file("ck"))).code == 0);
  const Result r = run(dir, "label-ds " + data_args() + " --checkpoint " + quote(dir.file("ck/latest.cpg")) +
                                " --labels-file " + quote(dir.file("labels.tsv")));
  REQUIRE_MESSAGE(r.code == 0, r.err);
  CHECK(lines(dir.file("labels.tsv")).size() == lines(kData + "/train.src").size());

  // Every reference equals every test document.
  std::ofstream(dir.file("same.src")) << "old tiger saw news today\nbig mango met news today\n";
  std::ofstream(dir.file("same.tgt")) << "animal saw news\nanimal saw news\n";
  const Result s = run(dir, "label-ds " + data_args() + " --train-source " + quote(dir.file("same.src")) +
                                " --train-target " + quote(dir.file("same.tgt")) + " --test-source " +
                                quote(dir.file("same.tgt")) + " --checkpoint " + quote(dir.file("ck/latest.cpg")) +
                                " --labels-file " + quote(dir.file("same.tsv")));
  REQUIRE_MESSAGE(s.code == 0, s.err);
  const std::vector<std::string> out = lines(dir.file("same.tsv"));
  REQUIRE(out.size() == 2);
  CHECK(out[0] == "0\t0\t1.68");
  CHECK(out[1] == "1\t0\t1.68");

  std::ofstream(dir.file("empty.src")) << "";
  const Result e = run(dir, "label-ds " + data_args() + " --test-source " + quote(dir.file("empty.src")) +
                                " --checkpoint " + quote(dir.file("ck/latest.cpg")) + " --labels-file " +
                                quote(dir.file("x.tsv")));
  CHECK(e.code == 1);
  CHECK(e.err.rfind("error: invalid_argument: ", 0) == 0);
}

TEST_CASE("decoding writes one line per input and is reproducible") {
  TempDir dir("cpg_cli");
  REQUIRE(run(dir, train_args(dir.file("ck"))).code == 0);
  const std::string ckpt = dir.file("ck/latest.cpg");
  const Result b = run(dir, decode_args(ckpt, dir.file("beam.txt")));
  REQUIRE_MESSAGE(b.code == 0, b.err);
  CHECK(lines(dir.file("beam.txt")).size() == lines(kData + "/test.src").size());
  REQUIRE(run(dir, decode_args(ckpt, dir.file("beam2.txt"))).code == 0);
  CHECK(slurp(dir.file("beam.txt")) == slurp(dir.file("beam2.txt")));

  REQUIRE(run(dir, decode_args(ckpt, dir.file("greedy.txt")) + " --decoder greedy").code == 0);
  REQUIRE(run(dir, decode_args(ckpt, dir.file("beam1.txt")) + " --beam-size 1").code == 0);
  CHECK(slurp(dir.file("greedy.txt")) == slurp(dir.file("beam1.txt")));

  REQUIRE(run(dir, decode_args(ckpt, dir.file("r1.txt")) + " --selection random").code == 0);
  REQUIRE(run(dir, decode_args(ckpt, dir.file("r2.txt")) + " --selection random").code == 0);
  CHECK(slurp(dir.file("r1.txt")) == slurp(dir.file("r2.txt")));

  const Result m = run(dir, decode_args(ckpt, dir.file("x.txt")) + " --embedding-dim 7");
  CHECK(m.code == 5);
  CHECK(m.err.rfind("error: mismatch: ", 0) == 0);
  const Result d = run(dir, decode_args(ckpt, dir.file("x.txt")) + " --decoder sample");
  CHECK(d.code == 4);
}

TEST_CASE("evaluation scores, reports and rejects misaligned files") {
  TempDir dir("cpg_cli");
  const std::string refs = kData + "/train.tgt";
  const Result self = run(dir, "eval --summaries " + quote(refs) + " --references " + quote(refs) + " --report-kv " +
                                   quote(dir.file("self.kv")));
  REQUIRE_MESSAGE(self.code == 0, self.err);
  CHECK(slurp(dir.file("self.kv")).find("rouge1_f=1.000000\n") != std::string::npos);
  CHECK(self.out.find("ROUGE-1") != std::string::npos);

  std::ofstream(dir.file("sum.txt")) << "group saw news\n\nthe tiger\n";
  std::ofstream(dir.file("ref.txt")) << "group saw news\nfruit met news\tfruit news\nanimal saw the tiger\n";
  std::ofstream(dir.file("src.txt")) << "athletes saw news\nmango met news\nthe tiger ran\n";
  const Result r = run(dir, "eval --summaries " + quote(dir.file("sum.txt")) + " --references " +
                                quote(dir.file("ref.txt")) + " --sources " + quote(dir.file("src.txt")) +
                                " --report-kv " + quote(dir.file("r.kv")) + " --report-table " +
                                quote(dir.file("r.txt")));
  REQUIRE_MESSAGE(r.code == 0, r.err);
  const std::vector<std::string> sums{"group saw news", "", "the tiger"};
  const std::vector<std::vector<std::string>> rs{{"group saw news"}, {"fruit met news", "fruit news"},
                                                 {"animal saw the tiger"}};
  const std::vector<std::string> srcs{"athletes saw news", "mango met news", "the tiger ran"};
  const EvalReport direct = evaluate(sums, rs, srcs, EvalMode::kF1);
  CHECK(slurp(dir.file("r.kv")) == format_report_kv(direct));
  CHECK(slurp(dir.file("r.txt")) == format_report_table(direct));
  CHECK(r.out == format_report_table(direct));
  CHECK(direct.examples == 3);

  const Result bad = run(dir, "eval --summaries " + quote(dir.file("sum.txt")) + " --references " + quote(refs));
  CHECK(bad.code == 5);
  CHECK(bad.err.rfind("error: mismatch: ", 0) == 0);
}

TEST_CASE("concepts prints the top candidates") {
  TempDir dir("cpg_cli");
  const Result r = run(dir, "concepts athletes --concepts " + quote(kData + "/concepts.tsv") + " --k 2");
  REQUIRE_MESSAGE(r.code == 0, r.err);
  CHECK(r.out == "group\t0.7\nthing\t0.2\n");
  CHECK(run(dir, "concepts athletes --concepts " + quote(kData + "/concepts.tsv") + " --k 1").out == "group\t0.7\n");
  CHECK(run(dir, "concepts nobody --concepts " + quote(kData + "/concepts.tsv")).out.empty());
  const Result bad = run(dir, "concepts x --concepts " + quote(kData + "/bad_prob.tsv"));
  CHECK(bad.code == 3);
  CHECK(bad.err.find("bad_prob.tsv:1") != std::string::npos);
}

TEST_CASE("errors name their category and set the exit code") {
  TempDir dir("cpg_cli");
  const Result missing = run(dir, "train --train-source /nonexistent/a --train-target /nonexistent/b --checkpoint-dir " +
                                      quote(dir.file("ck")));
  CHECK(missing.code == 2);
  CHECK(missing.err.rfind("error: io: ", 0) == 0);
  const Result unknown = run(dir, "train -s colour=red");
  CHECK(unknown.code == 4);
  CHECK(unknown.err.find("colour") != std::string::npos);
  const Result required = run(dir, "decode");
  CHECK(required.code == 4);
  CHECK(required.err.find("checkpoint") != std::string::npos);
  CHECK(run(dir, "").code != 0);
  CHECK(run(dir, "frobnicate").code != 0);
  CHECK(run(dir, "--version").out == "0.1.0\n");
}

TEST_CASE("the log level comes from the environment") {
  TempDir dir("cpg_cli");
  const Result quiet = run(dir, train_args(dir.file("a")), "CPG_LOG_LEVEL=off");
  REQUIRE(quiet.code == 0);
  CHECK(quiet.err.empty());
  const Result chatty = run(dir, train_args(dir.file("b")), "CPG_LOG_LEVEL=debug");
  REQUIRE(chatty.code == 0);
  CHECK(chatty.err.find("[info] saved") != std::string::npos);
  CHECK(chatty.err.find("[debug] iteration 1 mle") != std::string::npos);
}
