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

#include "app/commands.h"

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <memory>
#include <sstream>

#include "classical/process_io.h"
#include "core/csv.h"
#include "core/error.h"
#include "core/rng.h"
#include "core/sequence_io.h"
#include "eval/metrics.h"
#include "json.hpp"
#include "model/checkpoint.h"
#include "model/model.h"

namespace tppsd::app {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;
using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw_data("cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::string fnv1a64(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string absolute(const std::string& path) {
  return path.empty() ? path : fs::absolute(fs::path(path)).lexically_normal().string();
}

void require_out(const std::string& out) {
  if (out.empty()) throw_usage("--out is required");
}

InputFile input(const std::string& path) { return {path, fnv1a64(read_file(path))}; }

json parse_json(const std::string& text, const char* what) {
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    throw_data(std::string("invalid ") + what + ": " + e.what());
  }
}

std::string policy_name(sampler::RejectionPolicy p) { return to_string(p); }

void finish(RunManifest& manifest, const std::string& out) {
  save_manifest(manifest_path_for(out), manifest);
}

// Log-likelihood scorer backed by either a process file or a checkpoint file.
struct Scorer {
  std::shared_ptr<const classical::GroundTruthProcess> process;
  std::shared_ptr<const model::Model> model;

  double operator()(const EventSequence& seq) const {
    return process ? process->log_likelihood(seq) : model->sequence_loglik(seq);
  }
};

Scorer load_scorer(const std::string& path) {
  const std::string text = read_file(path);
  const json j = parse_json(text, "scorer file");
  Scorer s;
  if (j.contains("tensors")) {
    s.model = std::make_shared<model::Model>(model::checkpoint_from_json(text));
  } else if (j.contains("kind")) {
    s.process = std::make_shared<classical::GroundTruthProcess>(
        classical::process_params_from_json(text));
  } else {
    throw_data("scorer file " + path + " is neither a checkpoint nor process parameters");
  }
  return s;
}

std::string format_bool(bool b) { return b ? "true" : "false"; }

// ---- option serialisation ----

json to_json(const SimulateOptions& o) {
  return {{"process", json::parse(classical::process_params_to_json(o.process))},
          {"n", o.n},
          {"t_end", o.t_end},
          {"seed", o.seed},
          {"out", o.out}};
}

SimulateOptions simulate_from_json(const json& j) {
  SimulateOptions o;
  o.process = classical::process_params_from_json(j.at("process").dump());
  o.n = j.at("n").get<std::size_t>();
  o.t_end = j.at("t_end").get<double>();
  o.seed = j.at("seed").get<std::uint64_t>();
  o.out = j.at("out").get<std::string>();
  return o;
}

json to_json(const TrainOptions& o) {
  return {{"data", o.data},
          {"model", json::parse(model::config_to_json(o.model))},
          {"train", json::parse(train::train_config_to_json(o.train))},
          {"out", o.out}};
}

TrainOptions train_from_json(const json& j) {
  TrainOptions o;
  o.data = j.at("data").get<std::string>();
  o.model = model::config_from_json(j.at("model").dump());
  o.train = train::train_config_from_json(j.at("train").dump());
  o.out = j.at("out").get<std::string>();
  return o;
}

json to_json(const SampleOptions& o) {
  return {{"mode", to_string(o.mode)}, {"target", o.target}, {"draft", o.draft},
          {"gamma", o.gamma},          {"t_end", o.t_end},   {"runs", o.runs},
          {"seed", o.seed},            {"policy", policy_name(o.policy)},
          {"out", o.out}};
}

SampleOptions sample_from_json(const json& j) {
  SampleOptions o;
  o.mode = parse_sample_mode(j.at("mode").get<std::string>());
  o.target = j.at("target").get<std::string>();
  o.draft = j.at("draft").get<std::string>();
  o.gamma = j.at("gamma").get<int>();
  o.t_end = j.at("t_end").get<double>();
  o.runs = j.at("runs").get<std::size_t>();
  o.seed = j.at("seed").get<std::uint64_t>();
  o.policy = parse_rejection_policy(j.at("policy").get<std::string>());
  o.out = j.at("out").get<std::string>();
  return o;
}

json to_json(const EvalOptions& o) {
  return {{"metric", to_string(o.metric)},
          {"data", o.data},
          {"process", o.process},
          {"data_b", o.data_b},
          {"scorer_a", o.scorer_a},
          {"scorer_b", o.scorer_b},
          {"target", o.target},
          {"draft", o.draft},
          {"history_length", o.history_length},
          {"repetitions", o.repetitions},
          {"gamma", o.gamma},
          {"seed", o.seed},
          {"out", o.out}};
}

EvalOptions eval_from_json(const json& j) {
  EvalOptions o;
  o.metric = parse_eval_metric(j.at("metric").get<std::string>());
  o.data = j.at("data").get<std::string>();
  o.process = j.at("process").get<std::string>();
  o.data_b = j.at("data_b").get<std::string>();
  o.scorer_a = j.at("scorer_a").get<std::string>();
  o.scorer_b = j.at("scorer_b").get<std::string>();
  o.target = j.at("target").get<std::string>();
  o.draft = j.at("draft").get<std::string>();
  o.history_length = j.at("history_length").get<std::size_t>();
  o.repetitions = j.at("repetitions").get<std::size_t>();
  o.gamma = j.at("gamma").get<int>();
  o.seed = j.at("seed").get<std::uint64_t>();
  o.out = j.at("out").get<std::string>();
  return o;
}

json to_json(const BenchOptions& o) {
  return {{"target", o.target}, {"draft", o.draft},
          {"gammas", o.gammas}, {"repetitions", o.repetitions},
          {"t_end", o.t_end},   {"seed", o.seed},
          {"policy", policy_name(o.policy)}, {"out", o.out}};
}

BenchOptions bench_from_json(const json& j) {
  BenchOptions o;
  o.target = j.at("target").get<std::string>();
  o.draft = j.at("draft").get<std::string>();
  o.gammas = j.at("gammas").get<std::vector<int>>();
  o.repetitions = j.at("repetitions").get<std::size_t>();
  o.t_end = j.at("t_end").get<double>();
  o.seed = j.at("seed").get<std::uint64_t>();
  o.policy = parse_rejection_policy(j.at("policy").get<std::string>());
  o.out = j.at("out").get<std::string>();
  return o;
}

RunManifest make_manifest(const std::string& command, const json& config, std::uint64_t seed) {
  RunManifest m;
  m.command = command;
  m.config_json = config.dump();
  m.seed = seed;
  return m;
}

// ---- replay comparison ----

std::vector<std::string> split_lines(const std::string& text) {
  std::vector<std::string> lines;
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);) lines.push_back(line);
  return lines;
}

// Splits one CSV line; quoted cells keep their quotes, which is enough for
// equality comparison.
std::vector<std::string> split_cells(const std::string& line) {
  std::vector<std::string> cells(1);
  bool quoted = false;
  for (char c : line) {
    if (c == '"') quoted = !quoted;
    if (c == ',' && !quoted) {
      cells.emplace_back();
    } else {
      cells.back() += c;
    }
  }
  return cells;
}

ArtifactCheck compare_artifact(const Artifact& artifact, const std::string& replayed) {
  ArtifactCheck check{artifact.role, artifact.path, replayed, false, ""};
  if (!fs::exists(artifact.path)) {
    check.detail = "original artifact missing";
    return check;
  }
  const std::string a = read_file(artifact.path);
  const std::string b = read_file(replayed);
  if (artifact.timing_columns.empty()) {
    check.identical = a == b;
    check.detail = check.identical ? "byte-identical" : "contents differ";
    return check;
  }
  const auto la = split_lines(a);
  const auto lb = split_lines(b);
  if (la.size() != lb.size() || la.empty() || la[0] != lb[0]) {
    check.detail = "table shape or header differs";
    return check;
  }
  const auto header = split_cells(la[0]);
  std::vector<bool> masked(header.size(), false);
  for (std::size_t c = 0; c < header.size(); ++c) {
    for (const auto& t : artifact.timing_columns) masked[c] = masked[c] || header[c] == t;
  }
  for (std::size_t r = 1; r < la.size(); ++r) {
    const auto ca = split_cells(la[r]);
    const auto cb = split_cells(lb[r]);
    if (ca.size() != cb.size()) {
      check.detail = "row " + std::to_string(r) + " differs in width";
      return check;
    }
    for (std::size_t c = 0; c < ca.size(); ++c) {
      if (c < masked.size() && masked[c]) continue;
      if (ca[c] != cb[c]) {
        check.detail = "row " + std::to_string(r) + " column " +
                       (c < header.size() ? header[c] : std::to_string(c)) + " differs";
        return check;
      }
    }
  }
  check.identical = true;
  check.detail = "identical outside timing columns";
  return check;
}

std::string redirect(const std::string& path, const std::string& out_dir) {
  return (fs::path(out_dir) / fs::path(path).filename()).string();
}

sampler::SampleResult run_one(SampleMode mode, const model::Model& target,
                              const model::Model* draft, int gamma,
                              sampler::RejectionPolicy policy, double t_end,
                              std::uint64_t seed, std::uint64_t run) {
  RngStream rng(seed, run);
  if (mode == SampleMode::kAr) return sampler::ar_sample(target, t_end, rng);
  sampler::SdOptions sd;
  sd.gamma = gamma;
  sd.policy = policy;
  return sampler::tpp_sd_sample(target, *draft, t_end, sd, rng);
}

std::vector<double> pooled_intervals(const std::vector<EventSequence>& seqs) {
  std::vector<double> out;
  for (const auto& s : seqs) {
    double prev = 0.0;
    for (const auto& e : s.events) {
      out.push_back(e.time - prev);
      prev = e.time;
    }
  }
  return out;
}

}  // namespace

std::string to_string(SampleMode mode) { return mode == SampleMode::kAr ? "ar" : "sd"; }

SampleMode parse_sample_mode(const std::string& s) {
  if (s == "ar") return SampleMode::kAr;
  if (s == "sd") return SampleMode::kSd;
  throw_usage("unknown sampling mode: " + s + " (expected ar or sd)");
}

std::string to_string(EvalMetric metric) {
  switch (metric) {
    case EvalMetric::kKs:
      return "ks";
    case EvalMetric::kWasserstein:
      return "wasserstein";
    case EvalMetric::kLoglik:
      return "loglik";
  }
  return "ks";
}

EvalMetric parse_eval_metric(const std::string& s) {
  if (s == "ks") return EvalMetric::kKs;
  if (s == "wasserstein") return EvalMetric::kWasserstein;
  if (s == "loglik") return EvalMetric::kLoglik;
  throw_usage("unknown metric: " + s + " (expected ks, wasserstein or loglik)");
}

std::string to_string(sampler::RejectionPolicy policy) {
  return policy == sampler::RejectionPolicy::kPositionwise ? "positionwise" : "alg1-literal";
}

sampler::RejectionPolicy parse_rejection_policy(const std::string& s) {
  if (s == "positionwise") return sampler::RejectionPolicy::kPositionwise;
  if (s == "alg1-literal") return sampler::RejectionPolicy::kAlg1Literal;
  throw_usage("unknown rejection policy: " + s + " (expected positionwise or alg1-literal)");
}

std::string manifest_path_for(const std::string& out) { return out + ".manifest.json"; }

std::string manifest_to_json(const RunManifest& m) {
  json inputs = json::array();
  for (const auto& i : m.inputs) inputs.push_back({{"path", i.path}, {"fnv1a64", i.fnv1a64}});
  json artifacts = json::array();
  for (const auto& a : m.artifacts) {
    artifacts.push_back({{"role", a.role}, {"path", a.path}, {"timing_columns", a.timing_columns}});
  }
  json timings = json::object();
  for (const auto& [k, v] : m.timings) timings[k] = v;
  json j = {{"format_version", 1},
            {"command", m.command},
            {"config", json::parse(m.config_json)},
            {"seed", m.seed},
            {"inputs", inputs},
            {"artifacts", artifacts},
            {"timings_seconds", timings},
            {"tool_version", m.tool_version}};
  return j.dump(2) + "\n";
}

RunManifest manifest_from_json(const std::string& text) {
  const json j = parse_json(text, "manifest");
  RunManifest m;
  try {
    if (j.at("format_version").get<int>() != 1) throw_data("unsupported manifest format_version");
    m.command = j.at("command").get<std::string>();
    m.config_json = j.at("config").dump();
    m.seed = j.at("seed").get<std::uint64_t>();
    for (const auto& i : j.at("inputs")) {
      m.inputs.push_back({i.at("path").get<std::string>(), i.at("fnv1a64").get<std::string>()});
    }
    for (const auto& a : j.at("artifacts")) {
      m.artifacts.push_back({a.at("role").get<std::string>(), a.at("path").get<std::string>(),
                             a.at("timing_columns").get<std::vector<std::string>>()});
    }
    for (const auto& [k, v] : j.at("timings_seconds").items()) {
      m.timings.emplace_back(k, v.get<double>());
    }
    m.tool_version = j.at("tool_version").get<std::string>();
  } catch (const json::exception& e) {
    throw_data(std::string("invalid manifest: ") + e.what());
  }
  return m;
}

void save_manifest(const std::string& path, const RunManifest& manifest) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw_data("cannot open " + path + " for writing");
  out << manifest_to_json(manifest);
  if (!out) throw_data("failed writing " + path);
}

RunManifest load_manifest(const std::string& path) { return manifest_from_json(read_file(path)); }

RunManifest run_simulate(const SimulateOptions& in) {
  SimulateOptions o = in;
  require_out(o.out);
  o.out = absolute(o.out);
  if (o.n < 1) throw_usage("n must be >= 1");
  const classical::GroundTruthProcess process(o.process);
  const auto start = Clock::now();
  const auto seqs = classical::make_synthetic_dataset(process, o.n, o.t_end, o.seed);
  const double elapsed = seconds_since(start);
  save_sequences(o.out, seqs);

  RunManifest m = make_manifest("simulate", to_json(o), o.seed);
  m.artifacts.push_back({"sequences", o.out, {}});
  m.timings.emplace_back("simulate", elapsed);
  finish(m, o.out);
  return m;
}

RunManifest run_train(const TrainOptions& in) {
  TrainOptions o = in;
  require_out(o.out);
  if (o.data.empty()) throw_usage("--data is required");
  o.data = absolute(o.data);
  o.out = absolute(o.out);
  o.model.validate();
  o.train.validate();
  if (!fs::exists(o.data)) throw_data("data file not found: " + o.data);
  auto seqs = load_sequences(o.data);
  if (o.model.num_marks < infer_num_marks(seqs)) {
    throw_data("data has marks beyond the model's num_marks");
  }
  const train::DatasetSplit split = train::split_dataset(std::move(seqs));
  const auto start = Clock::now();
  const train::TrainReport report = train::train(split.train, split.val, o.model, o.train);
  const double elapsed = seconds_since(start);
  model::save_checkpoint(o.out, report.checkpoint);
  const std::string report_path = o.out + ".report.csv";
  report.table().save(report_path);

  RunManifest m = make_manifest("train", to_json(o), o.train.seed);
  m.inputs.push_back(input(o.data));
  m.artifacts.push_back({"checkpoint", o.out, {}});
  m.artifacts.push_back({"report", report_path, {}});
  m.timings.emplace_back("train", elapsed);
  finish(m, o.out);
  return m;
}

RunManifest run_sample(const SampleOptions& in) {
  SampleOptions o = in;
  require_out(o.out);
  if (o.target.empty()) throw_usage("--target is required");
  if (o.mode == SampleMode::kSd && o.draft.empty()) {
    throw_usage("mode sd requires a --draft checkpoint");
  }
  if (o.gamma < 1) throw_usage("gamma must be >= 1");
  if (o.runs < 1) throw_usage("runs must be >= 1");
  o.target = absolute(o.target);
  o.draft = o.mode == SampleMode::kSd ? absolute(o.draft) : std::string();
  o.out = absolute(o.out);

  const model::Model target(model::load_checkpoint(o.target));
  std::unique_ptr<model::Model> draft;
  if (o.mode == SampleMode::kSd) draft = std::make_unique<model::Model>(model::load_checkpoint(o.draft));

  const bool sd = o.mode == SampleMode::kSd;
  std::vector<std::string> header{"run", "events"};
  if (sd) {
    for (const char* c : {"gamma", "events_drafted", "events_accepted", "alpha",
                          "target_forwards", "draft_forwards", "residual_fallbacks", "t_sd"}) {
      header.emplace_back(c);
    }
  } else {
    header.emplace_back("target_forwards");
    header.emplace_back("t_ar");
  }
  CsvTable stats(header);
  std::vector<EventSequence> seqs;
  double total = 0.0;
  for (std::size_t r = 0; r < o.runs; ++r) {
    sampler::SampleResult res =
        run_one(o.mode, target, draft.get(), o.gamma, o.policy, o.t_end, o.seed, r);
    const auto& s = res.stats;
    total += s.wall_seconds;
    std::vector<std::string> row{std::to_string(r), std::to_string(res.sequence.size())};
    if (sd) {
      row.insert(row.end(), {std::to_string(o.gamma), std::to_string(s.events_drafted),
                             std::to_string(s.events_accepted), format_double(s.acceptance_rate()),
                             std::to_string(s.target_forwards), std::to_string(s.draft_forwards),
                             std::to_string(s.residual_fallbacks), format_double(s.wall_seconds)});
    } else {
      row.insert(row.end(), {std::to_string(s.target_forwards), format_double(s.wall_seconds)});
    }
    stats.add_row(std::move(row));
    seqs.push_back(std::move(res.sequence));
  }
  save_sequences(o.out, seqs);
  const std::string stats_path = o.out + ".stats.csv";
  stats.save(stats_path);

  RunManifest m = make_manifest("sample", to_json(o), o.seed);
  m.inputs.push_back(input(o.target));
  if (sd) m.inputs.push_back(input(o.draft));
  m.artifacts.push_back({"sequences", o.out, {}});
  m.artifacts.push_back({"stats", stats_path, {sd ? "t_sd" : "t_ar"}});
  m.timings.emplace_back(sd ? "t_sd_mean" : "t_ar_mean", total / static_cast<double>(o.runs));
  finish(m, o.out);
  return m;
}

RunManifest run_eval(const EvalOptions& in) {
  EvalOptions o = in;
  require_out(o.out);
  o.out = absolute(o.out);
  for (std::string* p : {&o.data, &o.process, &o.data_b, &o.scorer_a, &o.scorer_b, &o.target,
                         &o.draft}) {
    *p = absolute(*p);
  }
  RunManifest m;
  const auto start = Clock::now();
  switch (o.metric) {
    case EvalMetric::kKs: {
      if (o.data.empty() || o.process.empty()) throw_usage("ks needs --data and --process");
      const auto seqs = load_sequences(o.data);
      const classical::GroundTruthProcess process(classical::load_process_params(o.process));
      const eval::KsReport report = eval::ks_statistic(eval::pooled_time_rescale(seqs, process));
      CsvTable summary({"statistic", "n", "band", "pass"});
      summary.add_row({format_double(report.statistic), std::to_string(report.n),
                       format_double(report.band), format_bool(report.pass)});
      summary.save(o.out);
      const std::string plot = o.out + ".plot.csv";
      eval::ks_plot_table(report).save(plot);
      m = make_manifest("eval", to_json(o), o.seed);
      m.inputs = {input(o.data), input(o.process)};
      m.artifacts = {{"ks_summary", o.out, {}}, {"ks_plot", plot, {}}};
      break;
    }
    case EvalMetric::kLoglik: {
      if (o.data.empty() || o.scorer_a.empty()) throw_usage("loglik needs --data and --scorer-a");
      if (o.data_b.empty()) o.data_b = o.data;
      if (o.scorer_b.empty()) o.scorer_b = o.scorer_a;
      const auto seqs_a = load_sequences(o.data);
      const auto seqs_b = load_sequences(o.data_b);
      const Scorer a = load_scorer(o.scorer_a);
      const Scorer b = load_scorer(o.scorer_b);
      const double la = eval::mean_loglik_per_event(seqs_a, a);
      const double lb = eval::mean_loglik_per_event(seqs_b, b);
      CsvTable table({"loglik_a", "loglik_b", "delta_loglik"});
      table.add_row({format_double(la), format_double(lb), format_double(std::abs(la - lb))});
      table.save(o.out);
      m = make_manifest("eval", to_json(o), o.seed);
      m.inputs = {input(o.data), input(o.data_b), input(o.scorer_a), input(o.scorer_b)};
      m.artifacts = {{"loglik", o.out, {}}};
      break;
    }
    case EvalMetric::kWasserstein: {
      if (o.data.empty() || o.target.empty()) throw_usage("wasserstein needs --data and --target");
      const auto seqs = load_sequences(o.data);
      const EventSequence* history = nullptr;
      for (const auto& s : seqs) {
        if (s.size() >= o.history_length) {
          history = &s;
          break;
        }
      }
      if (!history) {
        throw_data("no sequence in " + o.data + " has " + std::to_string(o.history_length) +
                   " events");
      }
      const model::Model target(model::load_checkpoint(o.target));
      std::unique_ptr<model::Model> draft;
      if (!o.draft.empty()) draft = std::make_unique<model::Model>(model::load_checkpoint(o.draft));
      eval::DivergenceOptions d;
      d.history_length = o.history_length;
      d.repetitions = o.repetitions;
      d.gamma = o.gamma;
      d.seed = o.seed;
      const auto div = eval::next_event_divergence(target, draft.get(), history->events, d);
      CsvTable table({"time_distance", "mark_distance"});
      table.add_row({format_double(div.time_distance), format_double(div.mark_distance)});
      table.save(o.out);
      m = make_manifest("eval", to_json(o), o.seed);
      m.inputs = {input(o.data), input(o.target)};
      if (draft) m.inputs.push_back(input(o.draft));
      m.artifacts = {{"divergence", o.out, {}}};
      break;
    }
  }
  m.timings.emplace_back("eval", seconds_since(start));
  finish(m, o.out);
  return m;
}

RunManifest run_bench(const BenchOptions& in) {
  BenchOptions o = in;
  require_out(o.out);
  if (o.target.empty() || o.draft.empty()) throw_usage("bench needs --target and --draft");
  if (o.gammas.empty()) throw_usage("gamma grid must be nonempty");
  for (int g : o.gammas) {
    if (g < 1) throw_usage("gamma must be >= 1");
  }
  if (o.repetitions < 1) throw_usage("repetitions must be >= 1");
  o.target = absolute(o.target);
  o.draft = absolute(o.draft);
  o.out = absolute(o.out);
  const model::Model target(model::load_checkpoint(o.target));
  const model::Model draft(model::load_checkpoint(o.draft));
  const auto reps = static_cast<double>(o.repetitions);
  const auto scorer = [&target](const EventSequence& s) { return target.sequence_loglik(s); };

  std::vector<EventSequence> ar_seqs;
  double t_ar = 0.0;
  for (std::size_t r = 0; r < o.repetitions; ++r) {
    auto res = run_one(SampleMode::kAr, target, nullptr, 1, o.policy, o.t_end, o.seed, r);
    t_ar += res.stats.wall_seconds;
    ar_seqs.push_back(std::move(res.sequence));
  }
  t_ar /= reps;
  const std::vector<double> ar_intervals = pooled_intervals(ar_seqs);

  std::vector<eval::MetricRecord> rows;
  for (int g : o.gammas) {
    std::vector<EventSequence> sd_seqs;
    double t_sd = 0.0;
    double alpha = 0.0;
    for (std::size_t r = 0; r < o.repetitions; ++r) {
      auto res = run_one(SampleMode::kSd, target, &draft, g, o.policy, o.t_end, o.seed, r);
      t_sd += res.stats.wall_seconds;
      alpha += res.stats.acceptance_rate();
      sd_seqs.push_back(std::move(res.sequence));
    }
    eval::MetricRecord rec;
    rec.set("gamma", g);
    rec.set("alpha", alpha / reps);
    rec.set("t_ar", t_ar);
    rec.set("t_sd", t_sd / reps);
    rec.set_speedup();
    const bool scorable = total_events(ar_seqs) > 0 && total_events(sd_seqs) > 0;
    rec.set("delta_loglik",
            scorable ? eval::likelihood_discrepancy(ar_seqs, scorer, sd_seqs, scorer) : 0.0);
    const std::vector<double> sd_intervals = pooled_intervals(sd_seqs);
    rec.set("interval_wasserstein", ar_intervals.empty() || sd_intervals.empty()
                                        ? 0.0
                                        : eval::wasserstein_1d(ar_intervals, sd_intervals));
    rows.push_back(std::move(rec));
  }
  eval::metrics_table(rows).save(o.out);

  RunManifest m = make_manifest("bench", to_json(o), o.seed);
  m.inputs = {input(o.target), input(o.draft)};
  m.artifacts = {{"bench", o.out, {"t_ar", "t_sd", "speedup"}}};
  m.timings.emplace_back("t_ar_mean", t_ar);
  finish(m, o.out);
  return m;
}

bool ReplayReport::all_identical() const noexcept {
  if (checks.empty()) return false;
  for (const auto& c : checks) {
    if (!c.identical) return false;
  }
  return true;
}

ReplayReport replay(const std::string& manifest_path, const std::string& out_dir) {
  const RunManifest original = load_manifest(manifest_path);
  for (const auto& i : original.inputs) {
    if (!fs::exists(i.path)) throw_data("input file missing: " + i.path);
    if (fnv1a64(read_file(i.path)) != i.fnv1a64) {
      throw_data("input file changed since the recorded run: " + i.path);
    }
  }
  fs::create_directories(out_dir);
  const json config = parse_json(original.config_json, "manifest config");
  const std::string out = redirect(config.at("out").get<std::string>(), out_dir);
  if (absolute(out) == absolute(config.at("out").get<std::string>())) {
    throw_usage("replay output directory must differ from the original output directory");
  }
  RunManifest replayed;
  if (original.command == "simulate") {
    auto o = simulate_from_json(config);
    o.out = out;
    replayed = run_simulate(o);
  } else if (original.command == "train") {
    auto o = train_from_json(config);
    o.out = out;
    replayed = run_train(o);
  } else if (original.command == "sample") {
    auto o = sample_from_json(config);
    o.out = out;
    replayed = run_sample(o);
  } else if (original.command == "eval") {
    auto o = eval_from_json(config);
    o.out = out;
    replayed = run_eval(o);
  } else if (original.command == "bench") {
    auto o = bench_from_json(config);
    o.out = out;
    replayed = run_bench(o);
  } else {
    throw_data("unknown command in manifest: " + original.command);
  }
  ReplayReport report;
  for (const auto& a : original.artifacts) {
    report.checks.push_back(compare_artifact(a, redirect(a.path, out_dir)));
  }
  return report;
}

}  // namespace tppsd::app
