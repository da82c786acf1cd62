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

#include "eval/metrics.h"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include "core/error.h"
#include "core/rng.h"
#include "sampler/sampler.h"

namespace tppsd::eval {
namespace {

std::vector<double> sorted_copy(std::span<const double> xs) {
  std::vector<double> out(xs.begin(), xs.end());
  std::sort(out.begin(), out.end());
  return out;
}

void require_finite(std::span<const double> xs, const char* what) {
  for (double x : xs) {
    if (!std::isfinite(x)) throw_numeric(std::string(what) + " contains a non-finite value");
  }
}

}  // namespace

std::vector<double> time_rescale(const EventSequence& seq,
                                 const classical::GroundTruthProcess& process) {
  return process.rescaled_intervals(seq);
}

std::vector<double> pooled_time_rescale(std::span<const EventSequence> sequences,
                                        const classical::GroundTruthProcess& process) {
  std::vector<double> out;
  for (const auto& seq : sequences) {
    const std::vector<double> z = time_rescale(seq, process);
    out.insert(out.end(), z.begin(), z.end());
  }
  return out;
}

KsReport ks_statistic(std::span<const double> z) {
  if (z.empty()) throw_usage("KS statistic needs at least one sample");
  require_finite(z, "KS sample");
  const std::vector<double> sorted = sorted_copy(z);
  const auto n = static_cast<double>(sorted.size());
  KsReport report;
  report.n = sorted.size();
  report.band = kKsBandCoefficient / std::sqrt(n);
  report.plot.reserve(sorted.size());
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    const double f = sorted[i] > 0.0 ? -std::expm1(-sorted[i]) : 0.0;
    const double above = static_cast<double>(i + 1) / n;
    const double below = static_cast<double>(i) / n;
    report.statistic = std::max({report.statistic, std::abs(above - f), std::abs(f - below)});
    report.plot.emplace_back(f, above);
  }
  report.pass = report.statistic < report.band;
  return report;
}

double kolmogorov_survival(double x) {
  if (!(x > 0.0)) return 1.0;
  if (x < 1.18) {
    // Theta-function form; converges fast for small x.
    const double pi2_8x2 = std::numbers::pi * std::numbers::pi / (8.0 * x * x);
    double sum = 0.0;
    for (int j = 1; j <= 7; j += 2) sum += std::exp(-static_cast<double>(j * j) * pi2_8x2);
    const double cdf = std::sqrt(2.0 * std::numbers::pi) / x * sum;
    return std::clamp(1.0 - cdf, 0.0, 1.0);
  }
  double sum = 0.0;
  double sign = 1.0;
  for (int j = 1; j <= 100; ++j) {
    const double term = std::exp(-2.0 * j * j * x * x);
    sum += sign * term;
    if (term < 1e-17) break;
    sign = -sign;
  }
  return std::clamp(2.0 * sum, 0.0, 1.0);
}

TwoSampleKs ks_two_sample(std::span<const double> xs, std::span<const double> ys) {
  if (xs.empty() || ys.empty()) throw_usage("two-sample KS needs nonempty samples");
  require_finite(xs, "KS sample");
  require_finite(ys, "KS sample");
  const std::vector<double> a = sorted_copy(xs);
  const std::vector<double> b = sorted_copy(ys);
  const auto n = static_cast<double>(a.size());
  const auto m = static_cast<double>(b.size());
  std::size_t i = 0;
  std::size_t j = 0;
  double d = 0.0;
  while (i < a.size() && j < b.size()) {
    const double v = std::min(a[i], b[j]);
    while (i < a.size() && a[i] == v) ++i;
    while (j < b.size() && b[j] == v) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / n - static_cast<double>(j) / m));
  }
  const double ne = std::sqrt(n * m / (n + m));
  return {d, kolmogorov_survival((ne + 0.12 + 0.11 / ne) * d)};
}

double wasserstein_1d(std::span<const double> xs, std::span<const double> ys) {
  if (xs.empty() || ys.empty()) throw_usage("Wasserstein distance needs nonempty samples");
  require_finite(xs, "Wasserstein sample");
  require_finite(ys, "Wasserstein sample");
  const std::vector<double> a = sorted_copy(xs);
  const std::vector<double> b = sorted_copy(ys);
  if (a.size() == b.size()) {
    double sum = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) sum += std::abs(a[i] - b[i]);
    return sum / static_cast<double>(a.size());
  }
  // Integral of |Qa(u) - Qb(u)| over the merged breakpoints i/n and j/m,
  // compared in integer arithmetic.
  const std::size_t n = a.size();
  const std::size_t m = b.size();
  double sum = 0.0;
  std::size_t i = 0;
  std::size_t j = 0;
  std::size_t u_num = 0;  // current u = u_num / (n * m)
  while (i < n && j < m) {
    const std::size_t next_a = (i + 1) * m;
    const std::size_t next_b = (j + 1) * n;
    const std::size_t next = std::min(next_a, next_b);
    sum += static_cast<double>(next - u_num) * std::abs(a[i] - b[j]);
    u_num = next;
    if (next_a == next) ++i;
    if (next_b == next) ++j;
  }
  return sum / (static_cast<double>(n) * static_cast<double>(m));
}

double categorical_emd(std::span<const double> p, std::span<const double> q) {
  if (p.size() != q.size()) {
    throw_usage("categorical distributions differ in size: " + std::to_string(p.size()) +
                " vs " + std::to_string(q.size()));
  }
  double sum = 0.0;
  for (std::size_t k = 0; k < p.size(); ++k) sum += std::abs(p[k] - q[k]);
  return 0.5 * sum;
}

double categorical_emd_counts(std::span<const double> p_counts,
                              std::span<const double> q_counts) {
  if (p_counts.size() != q_counts.size()) throw_usage("count vectors differ in size");
  const double sp = std::accumulate(p_counts.begin(), p_counts.end(), 0.0);
  const double sq = std::accumulate(q_counts.begin(), q_counts.end(), 0.0);
  if (!(sp > 0.0) || !(sq > 0.0)) throw_data("count vector has no mass");
  double sum = 0.0;
  for (std::size_t k = 0; k < p_counts.size(); ++k) {
    sum += std::abs(p_counts[k] / sp - q_counts[k] / sq);
  }
  return 0.5 * sum;
}

std::vector<double> mark_frequencies(std::span<const int> marks, int num_marks) {
  if (num_marks < 1) throw_usage("num_marks must be >= 1");
  std::vector<double> freq(static_cast<std::size_t>(num_marks), 0.0);
  if (marks.empty()) return freq;
  for (int k : marks) {
    if (k < 0 || k >= num_marks) throw_data("mark out of range: " + std::to_string(k));
    freq[static_cast<std::size_t>(k)] += 1.0;
  }
  for (double& f : freq) f /= static_cast<double>(marks.size());
  return freq;
}

double mean_loglik_per_event(std::span<const EventSequence> sequences,
                             const SequenceScorer& scorer) {
  const std::size_t events = total_events(sequences);
  if (events == 0) throw_data("no events to score");
  double sum = 0.0;
  for (const auto& seq : sequences) sum += scorer(seq);
  return sum / static_cast<double>(events);
}

double likelihood_discrepancy(std::span<const EventSequence> sequences,
                              const SequenceScorer& a, const SequenceScorer& b) {
  return likelihood_discrepancy(sequences, a, sequences, b);
}

double likelihood_discrepancy(std::span<const EventSequence> sequences_a,
                              const SequenceScorer& a,
                              std::span<const EventSequence> sequences_b,
                              const SequenceScorer& b) {
  return std::abs(mean_loglik_per_event(sequences_a, a) - mean_loglik_per_event(sequences_b, b));
}

NextEventDivergence next_event_divergence(const model::Model& target,
                                          const model::Model* draft_model,
                                          std::span<const Event> history,
                                          const DivergenceOptions& options) {
  if (history.size() < options.history_length) {
    throw_data("history has " + std::to_string(history.size()) + " events, need " +
               std::to_string(options.history_length));
  }
  if (options.repetitions < 1) throw_usage("repetitions must be >= 1");
  const auto prefix = history.first(options.history_length);
  NextEventDivergence out;
  sampler::SdOptions sd;
  sd.gamma = options.gamma;
  sampler::SampleRunStats stats;
  for (std::size_t r = 0; r < options.repetitions; ++r) {
    const RngStream base(options.seed, r);
    RngStream ar_rng = base.substream(stream_tag::kTarget);
    out.reference.push_back(sampler::ar_next_event(target, prefix, ar_rng));
    if (draft_model) {
      sampler::SdStreams streams(base);
      const sampler::SdStep step =
          sampler::sd_step(target, *draft_model, prefix, sd, streams, stats);
      out.compared.push_back(step.appended.front());
    } else {
      RngStream second = base.substream(stream_tag::kVerify);
      out.compared.push_back(sampler::ar_next_event(target, prefix, second));
    }
  }
  std::vector<double> ta;
  std::vector<double> tb;
  std::vector<int> ka;
  std::vector<int> kb;
  for (std::size_t r = 0; r < options.repetitions; ++r) {
    ta.push_back(out.reference[r].time);
    tb.push_back(out.compared[r].time);
    ka.push_back(out.reference[r].mark);
    kb.push_back(out.compared[r].mark);
  }
  const int k = target.config().num_marks;
  out.time_distance = wasserstein_1d(ta, tb);
  out.mark_distance = categorical_emd(mark_frequencies(ka, k), mark_frequencies(kb, k));
  return out;
}

void MetricRecord::set(const std::string& name, double value) {
  for (auto& [key, v] : entries_) {
    if (key == name) {
      v = value;
      return;
    }
  }
  entries_.emplace_back(name, value);
}

std::optional<double> MetricRecord::get(const std::string& name) const {
  for (const auto& [key, v] : entries_) {
    if (key == name) return v;
  }
  return std::nullopt;
}

void MetricRecord::set_speedup() {
  const auto t_ar = get("t_ar");
  const auto t_sd = get("t_sd");
  if (!t_ar || !t_sd) throw_usage("speedup needs both t_ar and t_sd");
  if (!(*t_sd > 0.0)) throw_numeric("t_sd must be positive");
  set("speedup", *t_ar / *t_sd);
}

CsvTable metrics_table(std::span<const MetricRecord> records) {
  if (records.empty()) throw_usage("no metric records");
  std::vector<std::string> header;
  for (const auto& [key, v] : records.front().entries()) header.push_back(key);
  CsvTable table(header);
  for (const auto& rec : records) {
    if (rec.entries().size() != header.size()) throw_usage("metric records differ in columns");
    std::vector<std::string> cells;
    for (std::size_t i = 0; i < header.size(); ++i) {
      if (rec.entries()[i].first != header[i]) throw_usage("metric records differ in columns");
      cells.push_back(format_double(rec.entries()[i].second));
    }
    table.add_row(std::move(cells));
  }
  return table;
}

CsvTable ks_plot_table(const KsReport& report) {
  CsvTable table({"model_cdf", "empirical_cdf"});
  for (const auto& [f, fn] : report.plot) table.add_row({format_double(f), format_double(fn)});
  return table;
}

}  // namespace tppsd::eval
