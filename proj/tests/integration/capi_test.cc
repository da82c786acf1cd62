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

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "tppsd/tppsd.h"

namespace {

namespace fs = std::filesystem;

std::string config(const std::string& name) {
  return (fs::path(TPPSD_CONFIG_DIR) / name).string();
}

class CApi : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("tppsd_capi_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }
  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  // Writes a tiny model config and trains a checkpoint at name.
  void make_checkpoint(const std::string& name, uint64_t seed) {
    std::ofstream(path("tiny.json"))
        << R"({"D": 8, "M": 2, "K": 2, "n_heads": 1, "n_layers": 1, "encoding": "thp", )"
        << R"("attention": "standard"})";
    std::ofstream(path("quick.json")) << R"({"format_version": 1, "max_epochs": 1, "patience": 1})";
    if (!fs::exists(path("data.jsonl"))) {
      tppsd_simulate_options sim;
      tppsd_simulate_options_init(&sim);
      const std::string params = config("multi_hawkes.json");
      const std::string out = path("data.jsonl");
      sim.process_path = params.c_str();
      sim.n = 10;
      sim.t_end = 5.0;
      sim.out = out.c_str();
      ASSERT_EQ(tppsd_simulate(&sim), TPPSD_OK) << tppsd_last_error();
    }
    tppsd_train_options tr;
    tppsd_train_options_init(&tr);
    const std::string data = path("data.jsonl"), model = path("tiny.json"),
                      quick = path("quick.json"), out = path(name);
    tr.data_path = data.c_str();
    tr.model_config_path = model.c_str();
    tr.train_config_path = quick.c_str();
    tr.has_seed = 1;
    tr.seed = seed;
    tr.out = out.c_str();
    ASSERT_EQ(tppsd_train(&tr), TPPSD_OK) << tppsd_last_error();
  }

  fs::path dir_;
};

TEST_F(CApi, VersionAndErrors) {
  EXPECT_STREQ(tppsd_version(), "0.1.0");
  tppsd_model* m = nullptr;
  EXPECT_EQ(tppsd_model_load(path("absent.json").c_str(), &m), TPPSD_ERR_DATA);
  EXPECT_EQ(m, nullptr);
  EXPECT_NE(std::string(tppsd_last_error()).find("absent.json"), std::string::npos);
  EXPECT_EQ(tppsd_model_load(nullptr, &m), TPPSD_ERR_USAGE);
  tppsd_process* p = nullptr;
  ASSERT_EQ(tppsd_process_load(config("poisson.json").c_str(), &p), TPPSD_OK);
  EXPECT_STREQ(tppsd_last_error(), "");
  tppsd_process_free(p);
  tppsd_model_free(nullptr);
  tppsd_sequence_free(nullptr);
}

TEST_F(CApi, SequencesAndProcessLikelihood) {
  const double times[] = {0.5, 1.5, 2.0};
  const int marks[] = {0, 0, 0};
  tppsd_sequence* seq = nullptr;
  ASSERT_EQ(tppsd_sequence_create(times, marks, 3, 4.0, &seq), TPPSD_OK);
  EXPECT_EQ(tppsd_sequence_size(seq), 3u);
  EXPECT_EQ(tppsd_sequence_t_end(seq), 4.0);
  double t = 0.0;
  int k = -1;
  ASSERT_EQ(tppsd_sequence_event(seq, 1, &t, &k), TPPSD_OK);
  EXPECT_EQ(t, 1.5);
  EXPECT_EQ(k, 0);
  EXPECT_EQ(tppsd_sequence_event(seq, 3, &t, &k), TPPSD_ERR_USAGE);

  tppsd_process* p = nullptr;
  std::ofstream(path("rate2.json")) << R"({"format_version": 1, "kind": "poisson", "A": 2, "b": 1, "omega": 0})";
  ASSERT_EQ(tppsd_process_load(path("rate2.json").c_str(), &p), TPPSD_OK) << tppsd_last_error();
  double ll = 0.0;
  ASSERT_EQ(tppsd_process_loglik(p, seq, &ll), TPPSD_OK);
  EXPECT_NEAR(ll, 3.0 * std::log(2.0) - 8.0, 1e-12);

  tppsd_sequence* sampled = nullptr;
  ASSERT_EQ(tppsd_process_sample(p, 10.0, 1, 0, &sampled), TPPSD_OK);
  EXPECT_GT(tppsd_sequence_size(sampled), 0u);
  tppsd_sequence_free(sampled);
  tppsd_process_free(p);
  tppsd_sequence_free(seq);

  const double bad_times[] = {1.0, 0.5};
  const int bad_marks[] = {0, 0};
  EXPECT_EQ(tppsd_sequence_create(bad_times, bad_marks, 2, 4.0, &seq), TPPSD_ERR_DATA);
}

TEST_F(CApi, ModelSamplingAndStats) {
  make_checkpoint("target.json", 1);
  make_checkpoint("draft.json", 2);
  tppsd_model *target = nullptr, *draft = nullptr;
  ASSERT_EQ(tppsd_model_load(path("target.json").c_str(), &target), TPPSD_OK);
  ASSERT_EQ(tppsd_model_load(path("draft.json").c_str(), &draft), TPPSD_OK);
  int k = 0;
  ASSERT_EQ(tppsd_model_num_marks(target, &k), TPPSD_OK);
  EXPECT_EQ(k, 2);

  tppsd_sequence* ar = nullptr;
  tppsd_sample_stats ar_stats;
  ASSERT_EQ(tppsd_sample_ar(target, 8.0, 3, 0, &ar, &ar_stats), TPPSD_OK);
  EXPECT_EQ(ar_stats.target_forwards, tppsd_sequence_size(ar) + 1);
  double ll = 0.0;
  EXPECT_EQ(tppsd_model_loglik(target, ar, &ll), TPPSD_OK);
  EXPECT_TRUE(std::isfinite(ll));

  tppsd_sequence *sd1 = nullptr, *sd2 = nullptr;
  tppsd_sample_stats s1, s2;
  ASSERT_EQ(tppsd_sample_sd(target, draft, 8.0, 4, TPPSD_POLICY_POSITIONWISE, 3, 0, &sd1, &s1),
            TPPSD_OK);
  ASSERT_EQ(tppsd_sample_sd(target, draft, 8.0, 4, TPPSD_POLICY_POSITIONWISE, 3, 0, &sd2, &s2),
            TPPSD_OK);
  ASSERT_EQ(tppsd_sequence_size(sd1), tppsd_sequence_size(sd2));
  for (size_t i = 0; i < tppsd_sequence_size(sd1); ++i) {
    double t1, t2;
    int k1, k2;
    tppsd_sequence_event(sd1, i, &t1, &k1);
    tppsd_sequence_event(sd2, i, &t2, &k2);
    EXPECT_EQ(t1, t2);
    EXPECT_EQ(k1, k2);
  }
  EXPECT_LE(s1.events_accepted, s1.events_drafted);
  EXPECT_EQ(s1.events_drafted, s2.events_drafted);
  EXPECT_EQ(tppsd_sample_sd(target, draft, 8.0, 0, TPPSD_POLICY_POSITIONWISE, 3, 0, &sd2, nullptr),
            TPPSD_ERR_USAGE);

  tppsd_sequence_free(ar);
  tppsd_sequence_free(sd1);
  tppsd_sequence_free(sd2);
  tppsd_model_free(target);
  tppsd_model_free(draft);
}

TEST_F(CApi, CommandsAndReplay) {
  make_checkpoint("target.json", 1);
  make_checkpoint("draft.json", 2);
  tppsd_sample_options so;
  tppsd_sample_options_init(&so);
  EXPECT_EQ(so.gamma, 10);
  const std::string target = path("target.json"), draft = path("draft.json"),
                    out = path("s.jsonl");
  so.mode = "sd";
  so.target_path = target.c_str();
  so.t_end = 5.0;
  so.out = out.c_str();
  EXPECT_EQ(tppsd_sample(&so), TPPSD_ERR_USAGE);
  so.draft_path = draft.c_str();
  ASSERT_EQ(tppsd_sample(&so), TPPSD_OK) << tppsd_last_error();

  int identical = 0;
  char* report = nullptr;
  const std::string manifest = out + ".manifest.json";
  ASSERT_EQ(tppsd_replay(manifest.c_str(), path("replayed").c_str(), &identical, &report),
            TPPSD_OK)
      << tppsd_last_error();
  EXPECT_EQ(identical, 1);
  ASSERT_NE(report, nullptr);
  EXPECT_NE(std::string(report).find("byte-identical"), std::string::npos);
  tppsd_string_free(report);

  tppsd_bench_options bo;
  tppsd_bench_options_init(&bo);
  EXPECT_EQ(bo.num_gammas, 6u);
  EXPECT_EQ(bo.repetitions, 3u);
  const int gammas[] = {2, 3};
  const std::string bench = path("b.csv");
  bo.target_path = target.c_str();
  bo.draft_path = draft.c_str();
  bo.gammas = gammas;
  bo.num_gammas = 2;
  bo.repetitions = 1;
  bo.t_end = 3.0;
  bo.out = bench.c_str();
  ASSERT_EQ(tppsd_bench(&bo), TPPSD_OK) << tppsd_last_error();
  EXPECT_TRUE(fs::exists(bench + ".manifest.json"));
}

struct Captured {
  int count = 0;
  std::string last;
};

TEST_F(CApi, WarningHandlerReceivesMessages) {
  Captured cap;
  tppsd_set_warning_handler(
      [](const char* msg, void* user) {
        auto* c = static_cast<Captured*>(user);
        ++c->count;
        c->last = msg;
      },
      &cap);
  std::ofstream(path("super.json"))
      << R"({"format_version": 1, "kind": "hawkes", "mu": [1.0], "alpha": [[3.0]], "beta": [[1.0]]})";
  tppsd_process* p = nullptr;
  ASSERT_EQ(tppsd_process_load(path("super.json").c_str(), &p), TPPSD_OK) << tppsd_last_error();
  tppsd_process_free(p);
  tppsd_set_warning_handler(nullptr, nullptr);
  EXPECT_GE(cap.count, 1);
  EXPECT_NE(cap.last.find("branching ratio"), std::string::npos);
}

}  // namespace
