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

// Acceptance suite: prints one PASS/FAIL line per criterion and exits
// non-zero when any criterion fails. Arguments select a subset by number.

#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iterator>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "app/commands.h"
#include "autodiff/grad_check.h"
#include "classical/process.h"
#include "core/log.h"
#include "core/rng.h"
#include "eval/metrics.h"
#include "model/checkpoint.h"
#include "model/model.h"
#include "model/model_graph.h"
#include "sampler/sampler.h"
#include "support/oracles.h"
#include "train/trainer.h"

namespace {

namespace fs = std::filesystem;
using namespace tppsd;
using tppsd::testing::random_checkpoint;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* format, double a, double b = 0.0, double c = 0.0, double d = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, format, a, b, c, d);
  return buf;
}

fs::path scratch_dir(const std::string& name) {
  const fs::path dir =
      fs::temp_directory_path() / ("tppsd_acceptance_" + std::to_string(::getpid())) / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

double unit_exponential_cdf(double x) { return x <= 0.0 ? 0.0 : -std::expm1(-x); }

// ---- 1. thinning fidelity ----

Outcome thinning_fidelity() {
  const std::vector<std::pair<std::string, classical::ProcessParams>> processes{
      {"poisson", classical::reference_poisson()},
      {"hawkes", classical::reference_hawkes()},
      {"multi_hawkes", classical::reference_multi_hawkes()}};
  Outcome out{true, ""};
  for (const auto& [name, params] : processes) {
    const classical::GroundTruthProcess process(params);
    int passes = 0;
    std::string stats;
    for (std::uint64_t seed : {1, 2, 3}) {
      const auto data = classical::make_synthetic_dataset(process, 500, 100.0, seed);
      const auto z = eval::pooled_time_rescale(data, process);
      const double d = tppsd::testing::ks_distance(z, unit_exponential_cdf);
      const double band = 1.36 / std::sqrt(static_cast<double>(z.size()));
      passes += d < band ? 1 : 0;
      stats += fmt(" %.4f/%.4f", d, band);
    }
    out.pass = out.pass && passes >= 2;
    out.detail += name + " " + std::to_string(passes) + "/3 (D/band" + stats + "); ";
  }
  return out;
}

// ---- 2. residual interval sampler against quadrature ----

Outcome residual_interval_oracle() {
  set_warning_sink(nullptr);
  std::mt19937_64 gen(2024);
  std::uniform_int_distribution<int> components(1, 4);
  double worst = 0.0;
  std::size_t fallbacks = 0;
  for (int pair = 0; pair < 20; ++pair) {
    const auto target = tppsd::testing::random_mixture(gen, components(gen));
    const auto draft = tppsd::testing::random_mixture(gen, components(gen));
    const tppsd::testing::ResidualCdf oracle(target, draft);
    RngStream rng(7, pair);
    std::vector<double> xs(10000);
    for (double& x : xs) {
      const auto r = sampler::residual_interval_sample(target, draft, rng);
      fallbacks += r.fell_back ? 1 : 0;
      x = r.tau;
    }
    worst = std::max(worst, tppsd::testing::ks_distance(xs, oracle));
  }
  set_warning_sink(default_warning_sink());
  return {worst < 0.02, fmt("max KS distance %.4f over 20 pairs (limit 0.02), fallbacks %.0f",
                            worst, static_cast<double>(fallbacks))};
}

// ---- 3. mark-law exactness ----

Outcome mark_law_exactness() {
  std::mt19937_64 gen(3);
  double worst = 0.0;
  for (int pair = 0; pair < 50; ++pair) {
    const int k = 2 + pair % 3;
    const model::MarkDistribution t{tppsd::testing::random_simplex(gen, k)};
    const model::MarkDistribution d{tppsd::testing::random_simplex(gen, k, 1e-3)};
    const auto residual = sampler::residual_mark_distribution(t, d);
    // Accept branch: draft k, accept with min(1, f_T/f_D). Reject branch:
    // total rejection mass times the residual.
    double reject = 0.0;
    for (int j = 0; j < k; ++j) reject += d.probs[j] - std::min(d.probs[j], t.probs[j]);
    for (int j = 0; j < k; ++j) {
      const double law = std::min(d.probs[j], t.probs[j]) + reject * residual[j];
      worst = std::max(worst, std::abs(law - t.probs[j]));
    }
  }
  return {worst < 1e-12, fmt("max abs error %.3g over 50 pairs (limit 1e-12)", worst)};
}

// ---- 4. SD next event equals AR next event in law ----

model::ModelConfig sized_config(int heads, int layers) {
  model::ModelConfig c;
  c.dim = 16;
  c.num_components = 8;
  c.num_marks = 3;
  c.num_heads = heads;
  c.num_layers = layers;
  return c;
}

Outcome sd_equals_ar() {
  set_warning_sink(nullptr);
  const std::vector<Event> history{{0.4, 0}, {0.9, 2}, {1.7, 1}, {2.0, 0}};
  const int n = 2000;
  int passes = 0;
  double worst_emd = 0.0;
  std::string pvalues;
  for (std::uint64_t pair = 0; pair < 5; ++pair) {
    const model::Model target(random_checkpoint(sized_config(2, 4), 400 + pair, 0.3));
    const model::Model draft(random_checkpoint(sized_config(1, 1), 500 + pair, 0.3));
    std::vector<double> sd_times, ar_times;
    std::vector<int> sd_marks, ar_marks;
    for (int r = 0; r < n; ++r) {
      RngStream base(40 + pair, r);
      sampler::SdStreams streams(base);
      sampler::SampleRunStats stats;
      const auto step = sampler::sd_step(target, draft, history, {10, {}}, streams, stats);
      sd_times.push_back(step.appended.front().time);
      sd_marks.push_back(step.appended.front().mark);
      RngStream ar = base.substream(stream_tag::kTarget);
      const Event e = sampler::ar_next_event(target, history, ar);
      ar_times.push_back(e.time);
      ar_marks.push_back(e.mark);
    }
    const double d = tppsd::testing::two_sample_ks_distance(sd_times, ar_times);
    const double p = tppsd::testing::two_sample_ks_pvalue(d, n, n);
    passes += p > 0.01 ? 1 : 0;
    pvalues += fmt(" %.3f", p);
    const auto fs_ = eval::mark_frequencies(sd_marks, 3);
    const auto fa = eval::mark_frequencies(ar_marks, 3);
    double l1 = 0.0;
    for (int k = 0; k < 3; ++k) l1 += std::abs(fs_[k] - fa[k]);
    worst_emd = std::max(worst_emd, 0.5 * l1);
  }
  set_warning_sink(default_warning_sink());
  return {passes >= 4 && worst_emd < 0.06,
          std::to_string(passes) + "/5 pairs with p > 0.01 (p" + pvalues + "), " +
              fmt("max mark EMD %.4f (limit 0.06)", worst_emd)};
}

// ---- 5 and 6. layered-identity construction ----

// Target with 20 layers whose value projections are zero, and a 1-layer
// draft sharing its embedding and heads, so both define the same law.
struct LayeredPair {
  model::Checkpoint target;
  model::Checkpoint draft;
};

LayeredPair layered_identity_pair(std::uint64_t seed) {
  LayeredPair out;
  out.target = random_checkpoint(sized_config(2, 20), seed, 0.3);
  // Intervals around 0.5 time units keep about 200 events on [0, 100].
  out.target.at(model::param::kMeanBias).fill(std::log(0.5));
  out.target.at(model::param::kScaleBias).fill(std::log(0.5));
  for (int l = 0; l < 20; ++l) out.target.at(model::param::value(l)).fill(0.0);
  const model::ModelConfig dc = sized_config(1, 1);
  out.draft = random_checkpoint(dc, seed + 1, 0.3);
  for (const auto& spec : model::expected_tensors(dc)) {
    if (out.target.tensors.count(spec.name) != 0 && spec.name.rfind("layer", 0) != 0) {
      out.draft.tensors[spec.name] = out.target.at(spec.name);
    }
  }
  out.draft.at(model::param::value(0)).fill(0.0);
  return out;
}

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

Outcome identity_speedup() {
  const LayeredPair pair = layered_identity_pair(50);
  const model::Model target(pair.target);
  const model::Model draft(pair.draft);
  double t_ar = 0.0, t_sd = 0.0;
  std::size_t drafted = 0, accepted = 0, ar_events = 0, sd_events = 0;
  const int reps = 3;
  for (int r = 0; r < reps; ++r) {
    RngStream a(60, r), b(61, r);
    auto start = std::chrono::steady_clock::now();
    const auto ar = sampler::ar_sample(target, 100.0, a);
    t_ar += seconds_since(start);
    start = std::chrono::steady_clock::now();
    const auto sd = sampler::tpp_sd_sample(target, draft, 100.0, {10, {}}, b);
    t_sd += seconds_since(start);
    drafted += sd.stats.events_drafted;
    accepted += sd.stats.events_accepted;
    ar_events += ar.sequence.size();
    sd_events += sd.sequence.size();
  }
  const double alpha = static_cast<double>(accepted) / static_cast<double>(drafted);
  const double speedup = t_ar / t_sd;
  return {accepted == drafted && speedup > 1.5,
          fmt("alpha %.6f, T_AR %.3fs, T_SD %.3fs, speedup %.2f (limit 1.5)", alpha, t_ar / reps,
              t_sd / reps, speedup) +
              fmt(", mean events AR %.0f SD %.0f", static_cast<double>(ar_events) / reps,
                  static_cast<double>(sd_events) / reps)};
}

std::vector<std::vector<double>> read_csv_numbers(const fs::path& path) {
  std::ifstream is(path);
  std::string line;
  std::getline(is, line);
  std::vector<std::vector<double>> rows;
  while (std::getline(is, line)) {
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) row.push_back(std::stod(cell));
    rows.push_back(row);
  }
  return rows;
}

bool unimodal(const std::vector<double>& v) {
  const auto peak = std::max_element(v.begin(), v.end()) - v.begin();
  for (std::ptrdiff_t i = 1; i <= peak; ++i) {
    if (v[i] < v[i - 1]) return false;
  }
  for (std::size_t i = peak + 1; i < v.size(); ++i) {
    if (v[i] > v[i - 1]) return false;
  }
  return true;
}

Outcome gamma_ablation() {
  LayeredPair pair = layered_identity_pair(70);
  std::mt19937_64 gen(71);
  std::normal_distribution<double> noise(0.0, 1.0);
  for (double& v : pair.draft.at(model::param::kMeanBias).values()) v += 0.08 * noise(gen);
  for (double& v : pair.draft.at(model::param::kMarkOutBias).values()) v += 0.08 * noise(gen);
  const fs::path dir = scratch_dir("ablation");
  model::save_checkpoint(dir / "target.json", pair.target);
  model::save_checkpoint(dir / "draft.json", pair.draft);
  app::BenchOptions opts;
  opts.target = (dir / "target.json").string();
  opts.draft = (dir / "draft.json").string();
  opts.repetitions = 3;
  opts.t_end = 100.0;
  opts.seed = 72;
  opts.out = (dir / "bench.csv").string();
  set_warning_sink(nullptr);
  app::run_bench(opts);
  set_warning_sink(default_warning_sink());
  // Columns gamma, alpha, t_ar, t_sd, speedup, delta_loglik, interval_wasserstein.
  const auto rows = read_csv_numbers(dir / "bench.csv");
  std::vector<double> alpha, speedup;
  std::string table;
  for (const auto& r : rows) {
    alpha.push_back(r[1]);
    speedup.push_back(r[4]);
    table += fmt(" g=%.0f a=%.3f S=%.2f;", r[0], r[1], r[4]);
  }
  bool alpha_ok = rows.size() == 6 && alpha.front() < 1.0;
  for (std::size_t i = 1; i < alpha.size(); ++i) alpha_ok = alpha_ok && alpha[i] <= alpha[i - 1];
  const bool shape_ok = unimodal(speedup);
  return {alpha_ok && shape_ok, std::string("alpha non-increasing: ") +
                                    (alpha_ok ? "yes" : "no") + ", speedup unimodal: " +
                                    (shape_ok ? "yes" : "no") + ";" + table};
}

// ---- 7. training sanity ----

double pooled_ks(const model::Model& m, const classical::GroundTruthProcess& process,
                 std::uint64_t seed) {
  std::vector<EventSequence> samples;
  for (int r = 0; r < 100; ++r) {
    RngStream rng(seed, r);
    samples.push_back(sampler::ar_sample(m, 25.0, rng).sequence);
  }
  const auto z = eval::pooled_time_rescale(samples, process);
  return tppsd::testing::ks_distance(z, unit_exponential_cdf);
}

Outcome training_sanity() {
  const classical::GroundTruthProcess process(classical::PoissonParams{2.0, 1.0, 0.0});
  const auto split = train::split_dataset(classical::make_synthetic_dataset(process, 200, 25.0, 8));
  model::ModelConfig mc;
  mc.dim = 8;
  mc.num_components = 4;
  mc.num_marks = 1;
  mc.num_heads = 1;
  mc.num_layers = 1;
  train::TrainConfig tc;
  tc.learning_rate = 0.01;
  tc.batch_size = 16;
  tc.max_epochs = 40;
  tc.patience = 8;
  tc.seed = 9;
  const auto report = train::train(split.train, split.val, mc, tc);
  const double truth = eval::mean_loglik_per_event(
      split.val, [&](const EventSequence& s) { return process.log_likelihood(s); });
  // Rescore the returned checkpoint rather than trusting the report.
  const model::Model trained(report.checkpoint);
  const double val = eval::mean_loglik_per_event(
      split.val, [&](const EventSequence& s) { return trained.sequence_loglik(s); });
  const double gap = std::abs(val - truth);
  const double ks_trained = pooled_ks(trained, process, 10);
  const double ks_untrained = pooled_ks(model::Model(model::initialize_checkpoint(mc, tc.seed)),
                                        process, 10);
  return {gap < 0.1 && ks_trained < ks_untrained,
          fmt("val loglik %.6f vs ground truth %.6f (gap %.2g, limit 0.1); ", val, truth, gap) +
              fmt("pooled D_KS trained %.4f vs untrained %.4f; ", ks_trained, ks_untrained) +
              std::to_string(report.epochs.size()) + " epochs, best " +
              std::to_string(report.best_epoch)};
}

// ---- 8. gradient correctness ----

Outcome gradient_correctness() {
  const std::vector<std::pair<model::Encoding, model::Attention>> variants{
      {model::Encoding::kThp, model::Attention::kStandard},
      {model::Encoding::kSahp, model::Attention::kStandard},
      {model::Encoding::kAttNhp, model::Attention::kStandard},
      {model::Encoding::kThp, model::Attention::kAttNhp},
      {model::Encoding::kAttNhp, model::Attention::kAttNhp}};
  double worst = 0.0;
  for (std::size_t i = 0; i < variants.size(); ++i) {
    model::ModelConfig c;
    c.dim = 8;
    c.num_components = 4;
    c.num_marks = 2;
    c.num_heads = 2;
    c.num_layers = 1 + i % 2;
    c.encoding = variants[i].first;
    c.attention = variants[i].second;
    const model::Checkpoint ckpt = random_checkpoint(c, 80 + i);
    EventSequence seq{{}, 6.0};
    RngStream rng(81, i);
    double t = 0.0;
    for (int e = 0; e < 5; ++e) {
      t += 0.2 + rng.uniform01();
      seq.events.push_back({t, static_cast<int>(rng.next_u64() % 2)});
    }
    const auto f = [&](ad::Tape& tape, std::span<const ad::Var> vars) {
      return model::sequence_loglik_graph(tape, model::GraphParams(c, vars), seq);
    };
    worst = std::max(worst, ad::grad_check(f, model::parameter_tensors(ckpt)).max_rel_error);
  }
  return {worst < 1e-4, fmt("max relative error %.3g over 5 models (limit 1e-4)", worst)};
}

// ---- 9. determinism through the command line ----

std::string read_file(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  return std::string(std::istreambuf_iterator<char>(is), {});
}

Outcome cli_determinism() {
  const fs::path dir = scratch_dir("replay");
  const std::string cli = TPPSD_CLI_PATH;
  const std::string configs = TPPSD_CONFIG_DIR;
  std::ofstream(dir / "tiny.json")
      << R"({"D": 8, "M": 2, "K": 2, "n_heads": 1, "n_layers": 1, "encoding": "thp", )"
      << R"("attention": "standard"})";
  std::ofstream(dir / "quick.json")
      << R"({"format_version": 1, "learning_rate": 0.01, "max_epochs": 2, "patience": 2})";
  const auto p = [&](const std::string& name) { return (dir / name).string(); };
  const std::vector<std::pair<std::string, std::string>> commands{
      {"data.jsonl", "simulate --params " + configs + "/multi_hawkes.json --n 30 --t-end 10 "
                     "--seed 3 --out " + p("data.jsonl")},
      {"target.json", "train --data " + p("data.jsonl") + " --model-config " + p("tiny.json") +
                          " --train-config " + p("quick.json") + " --out " + p("target.json")},
      {"draft.json", "train --data " + p("data.jsonl") + " --model-config " + p("tiny.json") +
                         " --train-config " + p("quick.json") + " --seed 5 --out " +
                         p("draft.json")},
      {"ar.jsonl", "sample --mode ar --target " + p("target.json") +
                       " --t-end 10 --runs 3 --seed 4 --out " + p("ar.jsonl")},
      {"sd.jsonl", "sample --mode sd --target " + p("target.json") + " --draft " +
                       p("draft.json") + " --gamma 4 --t-end 10 --runs 3 --seed 4 --out " +
                       p("sd.jsonl")},
      {"ks.csv", "eval ks --data " + p("data.jsonl") + " --process " + configs +
                     "/multi_hawkes.json --out " + p("ks.csv")},
      {"ws.csv", "eval wasserstein --data " + p("data.jsonl") + " --target " + p("target.json") +
                     " --draft " + p("draft.json") +
                     " --history-length 3 --repetitions 30 --gamma 4 --out " + p("ws.csv")},
      {"ll.csv", "eval loglik --data " + p("ar.jsonl") + " --data-b " + p("sd.jsonl") +
                     " --scorer-a " + p("target.json") + " --out " + p("ll.csv")},
      {"bench.csv", "bench --target " + p("target.json") + " --draft " + p("draft.json") +
                        " --gamma 1,4,8 --repetitions 2 --t-end 8 --out " + p("bench.csv")}};
  int identical = 0;
  int masked = 0;
  std::string failures;
  for (std::size_t i = 0; i < commands.size(); ++i) {
    const auto& [artifact, args] = commands[i];
    const std::string log = p("cmd.log");
    if (std::system((cli + " " + args + " > " + log + " 2>&1").c_str()) != 0) {
      failures += " " + artifact + "(run: " + read_file(log) + ")";
      continue;
    }
    const std::string replay = cli + " replay --manifest " + p(artifact + ".manifest.json") +
                               " --out " + p("replay_" + std::to_string(i)) + " > " + log +
                               " 2>&1";
    const int status = std::system(replay.c_str());
    const std::string text = read_file(log);
    // Exit 0 means every artifact matched; wall-clock columns are excluded.
    if (WIFEXITED(status) && WEXITSTATUS(status) == 0) {
      ++identical;
      masked += text.find("outside timing columns") != std::string::npos ? 1 : 0;
    } else {
      failures += " " + artifact;
    }
  }
  return {identical == static_cast<int>(commands.size()),
          std::to_string(identical) + "/" + std::to_string(commands.size()) +
              " command artifacts reproduced (" + std::to_string(masked) +
              " with wall-clock columns excluded)" +
              (failures.empty() ? "" : "; mismatched:" + failures)};
}

struct Criterion {
  int id;
  const char* name;
  std::function<Outcome()> run;
};

}  // namespace

int main(int argc, char** argv) {
  const std::vector<Criterion> criteria{
      {1, "thinning fidelity", thinning_fidelity},
      {2, "residual interval sampler matches quadrature", residual_interval_oracle},
      {3, "mark law exactness", mark_law_exactness},
      {4, "SD next event equals AR in law", sd_equals_ar},
      {5, "speedup on layered-identity construction", identity_speedup},
      {6, "draft length ablation shape", gamma_ablation},
      {7, "training sanity", training_sanity},
      {8, "gradient correctness", gradient_correctness},
      {9, "determinism via manifest replay", cli_determinism}};
  std::set<int> selected;
  for (int i = 1; i < argc; ++i) selected.insert(std::atoi(argv[i]));
  int failed = 0;
  for (const auto& c : criteria) {
    if (!selected.empty() && selected.count(c.id) == 0) continue;
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failed += o.pass ? 0 : 1;
    std::printf("%s criterion %d (%s): %s [%.1fs]\n", o.pass ? "PASS" : "FAIL", c.id, c.name,
                o.detail.c_str(), seconds_since(start));
    std::fflush(stdout);
  }
  fs::remove_all(fs::temp_directory_path() / ("tppsd_acceptance_" + std::to_string(::getpid())));
  return failed == 0 ? 0 : 1;
}
