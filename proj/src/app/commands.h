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

#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "classical/process.h"
#include "model/config.h"
#include "sampler/sampler.h"
#include "train/trainer.h"

namespace tppsd::app {

inline constexpr const char* kToolVersion = "0.1.0";

// Output files are derived from each command's primary output path:
//   <out>.manifest.json for every command, plus
//   train:  <out>.report.csv
//   sample: <out>.stats.csv
//   eval ks: <out>.plot.csv

struct SimulateOptions {
  classical::ProcessParams process;
  std::size_t n = 1000;
  double t_end = 100.0;
  std::uint64_t seed = 0;
  std::string out;
};

struct TrainOptions {
  std::string data;
  model::ModelConfig model;
  train::TrainConfig train;
  std::string out;
};

enum class SampleMode { kAr, kSd };

struct SampleOptions {
  SampleMode mode = SampleMode::kAr;
  std::string target;
  std::string draft;
  int gamma = 10;
  double t_end = 100.0;
  std::size_t runs = 1;
  std::uint64_t seed = 0;
  sampler::RejectionPolicy policy = sampler::RejectionPolicy::kPositionwise;
  std::string out;
};

enum class EvalMetric { kKs, kWasserstein, kLoglik };

struct EvalOptions {
  EvalMetric metric = EvalMetric::kKs;
  // ks: sequences scored against a process parameter file.
  std::string data;
  std::string process;
  // loglik: per-event mean log-likelihood of data under scorer_a against
  // data_b (default: data) under scorer_b; scorers are process or
  // checkpoint files.
  std::string data_b;
  std::string scorer_a;
  std::string scorer_b;
  // wasserstein: next-event draws after a history prefix taken from data.
  std::string target;
  std::string draft;
  std::size_t history_length = 100;
  std::size_t repetitions = 100;
  int gamma = 10;
  std::uint64_t seed = 0;
  std::string out;
};

struct BenchOptions {
  std::string target;
  std::string draft;
  std::vector<int> gammas{1, 5, 10, 20, 40, 60};
  std::size_t repetitions = 3;
  double t_end = 100.0;
  std::uint64_t seed = 0;
  sampler::RejectionPolicy policy = sampler::RejectionPolicy::kPositionwise;
  std::string out;
};

struct Artifact {
  std::string role;
  std::string path;
  // CSV columns holding wall-clock measurements.
  std::vector<std::string> timing_columns;
};

struct InputFile {
  std::string path;
  std::string fnv1a64;  // hex digest of the contents at run time
};

struct RunManifest {
  std::string command;
  std::string config_json;  // fully resolved options
  std::uint64_t seed = 0;
  std::vector<InputFile> inputs;
  std::vector<Artifact> artifacts;
  std::vector<std::pair<std::string, double>> timings;
  std::string tool_version = kToolVersion;
};

std::string manifest_to_json(const RunManifest& manifest);
RunManifest manifest_from_json(const std::string& text);
void save_manifest(const std::string& path, const RunManifest& manifest);
RunManifest load_manifest(const std::string& path);
std::string manifest_path_for(const std::string& out);

std::string to_string(SampleMode mode);
SampleMode parse_sample_mode(const std::string& s);
std::string to_string(EvalMetric metric);
EvalMetric parse_eval_metric(const std::string& s);
std::string to_string(sampler::RejectionPolicy policy);
sampler::RejectionPolicy parse_rejection_policy(const std::string& s);

// Each command writes its outputs and manifest and returns the manifest.
RunManifest run_simulate(const SimulateOptions& options);
RunManifest run_train(const TrainOptions& options);
RunManifest run_sample(const SampleOptions& options);
RunManifest run_eval(const EvalOptions& options);
RunManifest run_bench(const BenchOptions& options);

struct ArtifactCheck {
  std::string role;
  std::string original;
  std::string replayed;
  bool identical = false;
  std::string detail;
};

struct ReplayReport {
  std::vector<ArtifactCheck> checks;
  bool all_identical() const noexcept;
};

// Re-runs the manifest's command with outputs redirected into out_dir and
// compares every artifact with the original: byte for byte, except that
// timing columns of CSV artifacts are ignored. Throws Error(kData) when an
// input file changed since the original run.
ReplayReport replay(const std::string& manifest_path, const std::string& out_dir);

}  // namespace tppsd::app
