// Copyright 2026 The tppsd Authors. All Rights Reserved.
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

#include <gtest/gtest.h>
#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <sstream>
#include <string>

namespace {

namespace fs = std::filesystem;

std::string read_file(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  return std::string(std::istreambuf_iterator<char>(is), {});
}

void write_file(const fs::path& p, const std::string& text) {
  std::ofstream(p, std::ios::binary) << text;
}

std::size_t count_lines(const fs::path& p) {
  const std::string s = read_file(p);
  return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n'));
}

std::string config(const std::string& name) {
  return (fs::path(TPPSD_CONFIG_DIR) / name).string();
}

// Shared scratch directory with a small dataset and two tiny checkpoints.
class Cli : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    dir_ = fs::temp_directory_path() / ("tppsd_cli_" + std::to_string(::getpid()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
    write_file(dir_ / "tiny.json",
               R"({"D": 8, "M": 2, "K": 1, "n_heads": 1, "n_layers": 1, "encoding": "thp",)"
               R"( "attention": "standard"})");
    write_file(dir_ / "quick.json",
               R"({"format_version": 1, "learning_rate": 0.01, "batch_size": 8,)"
               R"( "max_epochs": 2, "patience": 2, "seed": 3})");
    ASSERT_EQ(run("simulate --params " + config("poisson.json") +
                  " --n 20 --t-end 8 --seed 1 --out " + path("data.jsonl")),
              0);
    ASSERT_EQ(run("train --data " + path("data.jsonl") + " --model-config " + path("tiny.json") +
                  " --train-config " + path("quick.json") + " --out " + path("target.json")),
              0);
    ASSERT_EQ(run("train --data " + path("data.jsonl") + " --model-config " + path("tiny.json") +
                  " --train-config " + path("quick.json") + " --seed 9 --out " +
                  path("draft.json")),
              0);
  }
  static void TearDownTestSuite() { fs::remove_all(dir_); }

  static std::string path(const std::string& name) { return (dir_ / name).string(); }

  // Runs the CLI and returns its exit code; output goes to last.log.
  static int run(const std::string& args) {
    const std::string cmd = std::string(TPPSD_CLI_PATH) + " " + args + " > " + path("last.log") +
                            " 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  }
  static std::string last_output() { return read_file(dir_ / "last.log"); }

  static int replay(const std::string& artifact, const std::string& subdir) {
    return run("replay --manifest " + path(artifact + ".manifest.json") + " --out " +
               path(subdir));
  }

  static fs::path dir_;
};

fs::path Cli::dir_;

TEST_F(Cli, HelpAndUsageErrors) {
  EXPECT_EQ(run("--help"), 0);
  EXPECT_EQ(run("frobnicate"), 1);
  EXPECT_EQ(run("simulate --n 3"), 1);
  EXPECT_EQ(run("sample --mode xx --target " + path("target.json") + " --out " + path("x")), 1);
}

TEST_F(Cli, SimulatePaperShape) {
  EXPECT_EQ(run("simulate --params " + config("poisson.json") +
                " --n 1000 --t-end 100 --seed 2 --out " + path("big.jsonl")),
            0);
  EXPECT_EQ(count_lines(dir_ / "big.jsonl"), 1000u);
  EXPECT_TRUE(fs::exists(dir_ / "big.jsonl.manifest.json"));
}

TEST_F(Cli, SimulateRejectsZeroCount) {
  EXPECT_EQ(run("simulate --params " + config("poisson.json") + " --n 0 --out " + path("z")), 1);
  EXPECT_NE(last_output().find("n must be >= 1"), std::string::npos);
}

TEST_F(Cli, SimulateIsDeterministic) {
  for (const char* name : {"a.jsonl", "b.jsonl"}) {
    ASSERT_EQ(run("simulate --params " + config("hawkes.json") + " --n 5 --t-end 20 --seed 4 --out " +
                  path(name)),
              0);
  }
  EXPECT_EQ(read_file(dir_ / "a.jsonl"), read_file(dir_ / "b.jsonl"));
}

TEST_F(Cli, MissingFilesAreDataErrors) {
  EXPECT_EQ(run("simulate --params " + path("nope.json") + " --out " + path("z")), 2);
  EXPECT_NE(last_output().find("nope.json"), std::string::npos);
  EXPECT_EQ(run("train --data " + path("missing.jsonl") + " --model-config " + path("tiny.json") +
                " --out " + path("z.json")),
            2);
  EXPECT_NE(last_output().find("missing.jsonl"), std::string::npos);
}

TEST_F(Cli, TrainWritesReportAndIsDeterministic) {
  ASSERT_EQ(run("train --data " + path("data.jsonl") + " --model-config " + path("tiny.json") +
                " --train-config " + path("quick.json") + " --out " + path("again.json")),
            0);
  EXPECT_EQ(read_file(dir_ / "again.json"), read_file(dir_ / "target.json"));
  const std::string report = read_file(dir_ / "target.json.report.csv");
  EXPECT_EQ(report.rfind("epoch,train_loglik,val_loglik,best_val_loglik\n", 0), 0u);
  EXPECT_EQ(count_lines(dir_ / "target.json.report.csv"), 3u);
}

TEST_F(Cli, SampleSdNeedsDraft) {
  EXPECT_EQ(run("sample --mode sd --target " + path("target.json") + " --out " + path("s")), 1);
}

TEST_F(Cli, SampleStatsColumns) {
  ASSERT_EQ(run("sample --mode sd --target " + path("target.json") + " --draft " +
                path("draft.json") + " --t-end 10 --runs 2 --seed 5 --out " + path("sd.jsonl")),
            0);
  const std::string sd = read_file(dir_ / "sd.jsonl.stats.csv");
  const std::string header = sd.substr(0, sd.find('\n'));
  EXPECT_NE(header.find("gamma"), std::string::npos);
  EXPECT_NE(header.find("alpha"), std::string::npos);
  EXPECT_NE(header.find("t_sd"), std::string::npos);
  EXPECT_EQ(count_lines(dir_ / "sd.jsonl"), 2u);
  ASSERT_EQ(run("sample --mode ar --target " + path("target.json") +
                " --t-end 10 --runs 2 --seed 5 --out " + path("ar.jsonl")),
            0);
  EXPECT_NE(read_file(dir_ / "ar.jsonl.stats.csv").find("t_ar"), std::string::npos);
}

TEST_F(Cli, EvalKsOnGeneratingProcessPasses) {
  ASSERT_EQ(run("eval ks --data " + path("data.jsonl") + " --process " + config("poisson.json") +
                " --out " + path("ks.csv")),
            0);
  const std::string summary = read_file(dir_ / "ks.csv");
  EXPECT_EQ(summary.rfind("statistic,n,band,pass\n", 0), 0u);
  EXPECT_NE(summary.find(",true"), std::string::npos);
  EXPECT_EQ(read_file(dir_ / "ks.csv.plot.csv").rfind("model_cdf,empirical_cdf\n", 0), 0u);
}

TEST_F(Cli, EvalLoglikIdenticalInputsGiveZero) {
  ASSERT_EQ(run("eval loglik --data " + path("data.jsonl") + " --scorer-a " + path("target.json") +
                " --out " + path("ll.csv")),
            0);
  const std::string t = read_file(dir_ / "ll.csv");
  EXPECT_EQ(t.rfind("loglik_a,loglik_b,delta_loglik\n", 0), 0u);
  EXPECT_EQ(t.substr(t.rfind(',') + 1), "0\n");
  ASSERT_EQ(run("eval loglik --data " + path("data.jsonl") + " --scorer-a " +
                config("poisson.json") + " --scorer-b " + path("target.json") + " --out " +
                path("ll2.csv")),
            0);
}

TEST_F(Cli, EvalWasserstein) {
  ASSERT_EQ(run("eval wasserstein --data " + path("data.jsonl") + " --target " +
                path("target.json") + " --draft " + path("draft.json") +
                " --history-length 5 --repetitions 20 --gamma 3 --out " + path("ws.csv")),
            0);
  EXPECT_EQ(read_file(dir_ / "ws.csv").rfind("time_distance,mark_distance\n", 0), 0u);
  EXPECT_EQ(run("eval wasserstein --data " + path("data.jsonl") + " --target " +
                path("target.json") + " --history-length 100000 --out " + path("ws2.csv")),
            2);
}

TEST_F(Cli, BenchSixRows) {
  ASSERT_EQ(run("bench --target " + path("target.json") + " --draft " + path("draft.json") +
                " --repetitions 1 --t-end 5 --out " + path("bench.csv")),
            0);
  EXPECT_EQ(count_lines(dir_ / "bench.csv"), 7u);
  EXPECT_EQ(read_file(dir_ / "bench.csv")
                .rfind("gamma,alpha,t_ar,t_sd,speedup,delta_loglik,interval_wasserstein\n", 0),
            0u);
}

TEST_F(Cli, EveryCommandReplaysIdentically) {
  ASSERT_EQ(run("sample --mode sd --target " + path("target.json") + " --draft " +
                path("draft.json") + " --t-end 10 --runs 2 --seed 6 --out " + path("rp.jsonl")),
            0);
  ASSERT_EQ(run("eval ks --data " + path("data.jsonl") + " --process " + config("poisson.json") +
                " --out " + path("rks.csv")),
            0);
  ASSERT_EQ(run("bench --target " + path("target.json") + " --draft " + path("draft.json") +
                " --gamma 1,4 --repetitions 1 --t-end 5 --out " + path("rb.csv")),
            0);
  int i = 0;
  for (const char* artifact : {"data.jsonl", "target.json", "rp.jsonl", "rks.csv", "rb.csv"}) {
    EXPECT_EQ(replay(artifact, "replay" + std::to_string(i++)), 0) << artifact << "\n"
                                                                   << last_output();
  }
  // Replaying into the original location is refused.
  EXPECT_NE(run("replay --manifest " + path("rp.jsonl.manifest.json") + " --out " + dir_.string()),
            0);
}

TEST_F(Cli, ReplayDetectsChangedInput) {
  ASSERT_EQ(run("simulate --params " + config("poisson.json") + " --n 20 --t-end 8 --seed 7 --out " +
                path("d2.jsonl")),
            0);
  ASSERT_EQ(run("eval ks --data " + path("d2.jsonl") + " --process " + config("poisson.json") +
                " --out " + path("k2.csv")),
            0);
  write_file(dir_ / "d2.jsonl", read_file(dir_ / "data.jsonl"));
  EXPECT_EQ(replay("k2.csv", "replay_changed"), 2);
  EXPECT_NE(last_output().find("d2.jsonl"), std::string::npos);
}

}  // namespace
