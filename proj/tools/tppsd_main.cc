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

#include <cstdint>
#include <cstdio>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "tppsd/tppsd.h"

namespace {

int report(tppsd_status status) {
  if (status != TPPSD_OK) {
    std::fprintf(stderr, "error: %s\n", tppsd_last_error());
    return status == TPPSD_ERR_INTERNAL ? 3 : static_cast<int>(status);
  }
  return 0;
}

const char* opt(const std::string& s) { return s.empty() ? nullptr : s.c_str(); }

tppsd_policy parse_policy(const std::string& s) {
  return s == "alg1-literal" ? TPPSD_POLICY_ALG1_LITERAL : TPPSD_POLICY_POSITIONWISE;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Speculative sampling for transformer temporal point processes"};
  app.require_subcommand(1);
  app.set_version_flag("--version", tppsd_version());

  // simulate
  std::string sim_params, sim_out;
  std::uint64_t sim_n = 1000, sim_seed = 0;
  double sim_t_end = 100.0;
  auto* simulate = app.add_subcommand("simulate", "Simulate a ground-truth process by thinning");
  simulate->add_option("--params", sim_params, "Process parameter file")->required();
  simulate->add_option("--n", sim_n, "Number of sequences")->capture_default_str();
  simulate->add_option("--t-end", sim_t_end, "Observation horizon")->capture_default_str();
  simulate->add_option("--seed", sim_seed, "Random seed")->capture_default_str();
  simulate->add_option("--out", sim_out, "Output sequence file")->required();

  // train
  std::string tr_data, tr_model, tr_config, tr_out;
  std::uint64_t tr_seed = 0;
  auto* train = app.add_subcommand("train", "Fit a model by maximum likelihood");
  train->add_option("--data", tr_data, "Sequence file, split 80/10/10")->required();
  train->add_option("--model-config", tr_model, "Model configuration file")->required();
  train->add_option("--train-config", tr_config, "Training configuration file");
  auto* tr_seed_opt = train->add_option("--seed", tr_seed, "Overrides the training seed");
  train->add_option("--out", tr_out, "Output checkpoint")->required();

  // sample
  std::string sa_mode = "ar", sa_target, sa_draft, sa_policy = "positionwise", sa_out;
  int sa_gamma = 10;
  double sa_t_end = 100.0;
  std::uint64_t sa_runs = 1, sa_seed = 0;
  auto* sample = app.add_subcommand("sample", "Sample sequences autoregressively or speculatively");
  sample->add_option("--mode", sa_mode, "ar or sd")
      ->check(CLI::IsMember({"ar", "sd"}))
      ->capture_default_str();
  sample->add_option("--target", sa_target, "Target checkpoint")->required();
  sample->add_option("--draft", sa_draft, "Draft checkpoint (mode sd)");
  sample->add_option("--gamma", sa_gamma, "Draft length")->capture_default_str();
  sample->add_option("--t-end", sa_t_end, "Sampling horizon")->capture_default_str();
  sample->add_option("--runs", sa_runs, "Independent runs")->capture_default_str();
  sample->add_option("--seed", sa_seed, "Random seed")->capture_default_str();
  sample->add_option("--policy", sa_policy, "positionwise or alg1-literal")
      ->check(CLI::IsMember({"positionwise", "alg1-literal"}))
      ->capture_default_str();
  sample->add_option("--out", sa_out, "Output sequence file")->required();

  // eval
  tppsd_eval_options ev;
  tppsd_eval_options_init(&ev);
  std::string ev_data, ev_process, ev_data_b, ev_scorer_a, ev_scorer_b, ev_target, ev_draft,
      ev_out;
  std::uint64_t ev_history = ev.history_length, ev_reps = ev.repetitions, ev_seed = 0;
  int ev_gamma = ev.gamma;
  auto* eval = app.add_subcommand("eval", "Evaluate samples or models");
  eval->require_subcommand(1);
  auto* ks = eval->add_subcommand("ks", "Time-rescaling KS test against a ground-truth process");
  ks->add_option("--data", ev_data, "Sequence file")->required();
  ks->add_option("--process", ev_process, "Process parameter file")->required();
  ks->add_option("--out", ev_out, "Summary table; plot data goes to <out>.plot.csv")->required();
  auto* ws = eval->add_subcommand("wasserstein", "Next-event divergence between AR and SD draws");
  ws->add_option("--data", ev_data, "Sequence file providing the history")->required();
  ws->add_option("--target", ev_target, "Target checkpoint")->required();
  ws->add_option("--draft", ev_draft, "Draft checkpoint; omit for an AR-vs-AR baseline");
  ws->add_option("--history-length", ev_history, "History prefix length")->capture_default_str();
  ws->add_option("--repetitions", ev_reps, "Draws per method")->capture_default_str();
  ws->add_option("--gamma", ev_gamma, "Draft length")->capture_default_str();
  ws->add_option("--seed", ev_seed, "Random seed")->capture_default_str();
  ws->add_option("--out", ev_out, "Output table")->required();
  auto* ll = eval->add_subcommand("loglik", "Per-event log-likelihood discrepancy");
  ll->add_option("--data", ev_data, "Sequence file scored by --scorer-a")->required();
  ll->add_option("--data-b", ev_data_b, "Sequence file scored by --scorer-b (default --data)");
  ll->add_option("--scorer-a", ev_scorer_a, "Process or checkpoint file")->required();
  ll->add_option("--scorer-b", ev_scorer_b, "Process or checkpoint file (default --scorer-a)");
  ll->add_option("--out", ev_out, "Output table")->required();

  // bench
  std::string be_target, be_draft, be_policy = "positionwise", be_out;
  std::vector<int> be_gammas{1, 5, 10, 20, 40, 60};
  std::uint64_t be_reps = 3, be_seed = 0;
  double be_t_end = 100.0;
  auto* bench = app.add_subcommand("bench", "Draft-length ablation of AR versus SD sampling");
  bench->add_option("--target", be_target, "Target checkpoint")->required();
  bench->add_option("--draft", be_draft, "Draft checkpoint")->required();
  bench->add_option("--gamma", be_gammas, "Draft lengths")->delimiter(',')->capture_default_str();
  bench->add_option("--repetitions", be_reps, "Seeds averaged per row")->capture_default_str();
  bench->add_option("--t-end", be_t_end, "Sampling horizon")->capture_default_str();
  bench->add_option("--seed", be_seed, "Random seed")->capture_default_str();
  bench->add_option("--policy", be_policy, "positionwise or alg1-literal")
      ->check(CLI::IsMember({"positionwise", "alg1-literal"}))
      ->capture_default_str();
  bench->add_option("--out", be_out, "Output table")->required();

  // replay
  std::string rp_manifest, rp_out;
  auto* replay = app.add_subcommand("replay", "Re-run a manifest and compare its outputs");
  replay->add_option("--manifest", rp_manifest, "Manifest file")->required();
  replay->add_option("--out", rp_out, "Directory for the replayed outputs")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  if (simulate->parsed()) {
    tppsd_simulate_options o;
    tppsd_simulate_options_init(&o);
    o.process_path = sim_params.c_str();
    o.n = sim_n;
    o.t_end = sim_t_end;
    o.seed = sim_seed;
    o.out = sim_out.c_str();
    return report(tppsd_simulate(&o));
  }
  if (train->parsed()) {
    tppsd_train_options o;
    tppsd_train_options_init(&o);
    o.data_path = tr_data.c_str();
    o.model_config_path = tr_model.c_str();
    o.train_config_path = opt(tr_config);
    o.has_seed = tr_seed_opt->count() > 0 ? 1 : 0;
    o.seed = tr_seed;
    o.out = tr_out.c_str();
    return report(tppsd_train(&o));
  }
  if (sample->parsed()) {
    tppsd_sample_options o;
    tppsd_sample_options_init(&o);
    o.mode = sa_mode.c_str();
    o.target_path = sa_target.c_str();
    o.draft_path = opt(sa_draft);
    o.gamma = sa_gamma;
    o.t_end = sa_t_end;
    o.runs = sa_runs;
    o.seed = sa_seed;
    o.policy = parse_policy(sa_policy);
    o.out = sa_out.c_str();
    return report(tppsd_sample(&o));
  }
  if (eval->parsed()) {
    ev.metric = ks->parsed() ? "ks" : ws->parsed() ? "wasserstein" : "loglik";
    ev.data_path = opt(ev_data);
    ev.process_path = opt(ev_process);
    ev.data_b_path = opt(ev_data_b);
    ev.scorer_a_path = opt(ev_scorer_a);
    ev.scorer_b_path = opt(ev_scorer_b);
    ev.target_path = opt(ev_target);
    ev.draft_path = opt(ev_draft);
    ev.history_length = ev_history;
    ev.repetitions = ev_reps;
    ev.gamma = ev_gamma;
    ev.seed = ev_seed;
    ev.out = ev_out.c_str();
    return report(tppsd_eval(&ev));
  }
  if (bench->parsed()) {
    tppsd_bench_options o;
    tppsd_bench_options_init(&o);
    o.target_path = be_target.c_str();
    o.draft_path = be_draft.c_str();
    o.gammas = be_gammas.data();
    o.num_gammas = be_gammas.size();
    o.repetitions = be_reps;
    o.t_end = be_t_end;
    o.seed = be_seed;
    o.policy = parse_policy(be_policy);
    o.out = be_out.c_str();
    return report(tppsd_bench(&o));
  }
  if (replay->parsed()) {
    int identical = 0;
    char* text = nullptr;
    const tppsd_status status =
        tppsd_replay(rp_manifest.c_str(), rp_out.c_str(), &identical, &text);
    if (status != TPPSD_OK) return report(status);
    std::fputs(text, stdout);
    tppsd_string_free(text);
    if (!identical) {
      std::fprintf(stderr, "error: replay outputs differ from the recorded run\n");
      return 2;
    }
    return 0;
  }
  return 1;
}
