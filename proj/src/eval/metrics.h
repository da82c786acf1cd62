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
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "classical/process.h"
#include "core/csv.h"
#include "core/event.h"
#include "model/model.h"

namespace tppsd::eval {

// Compensator increments between consecutive events; the first integrates
// from 0.
std::vector<double> time_rescale(const EventSequence& seq,
                                 const classical::GroundTruthProcess& process);

// Rescaled intervals of all sequences, concatenated in order.
std::vector<double> pooled_time_rescale(std::span<const EventSequence> sequences,
                                        const classical::GroundTruthProcess& process);

inline constexpr double kKsBandCoefficient = 1.36;

struct KsReport {
  double statistic = 0.0;
  std::size_t n = 0;
  double band = 0.0;  // 1.36 / sqrt(n)
  bool pass = false;  // statistic < band
  // (F(z_(i)), i / n) for the sorted samples.
  std::vector<std::pair<double, double>> plot;
};

// One-sample KS against the unit exponential. Throws for an empty sample.
KsReport ks_statistic(std::span<const double> z);

// Asymptotic Kolmogorov survival function P(K > x).
double kolmogorov_survival(double x);

struct TwoSampleKs {
  double statistic = 0.0;
  double p_value = 1.0;
};

// Two-sample KS with the asymptotic p-value and the effective-size
// correction (sqrt(ne) + 0.12 + 0.11 / sqrt(ne)).
TwoSampleKs ks_two_sample(std::span<const double> xs, std::span<const double> ys);

// 1-Wasserstein distance between empirical distributions.
double wasserstein_1d(std::span<const double> xs, std::span<const double> ys);

// Earth mover's distance under the 0/1 ground metric: half the L1 distance.
double categorical_emd(std::span<const double> p, std::span<const double> q);

// As above after normalising each count vector to unit mass.
double categorical_emd_counts(std::span<const double> p_counts,
                              std::span<const double> q_counts);

// Empirical frequencies of marks in [0, num_marks).
std::vector<double> mark_frequencies(std::span<const int> marks, int num_marks);

using SequenceScorer = std::function<double(const EventSequence&)>;

// Summed log-likelihood divided by the total event count. Throws
// Error(kData) when there are no events.
double mean_loglik_per_event(std::span<const EventSequence> sequences,
                             const SequenceScorer& scorer);

// |mean_loglik_per_event(A) - mean_loglik_per_event(B)| on one sample set.
double likelihood_discrepancy(std::span<const EventSequence> sequences,
                              const SequenceScorer& a, const SequenceScorer& b);

// Same discrepancy between two sample sets, each with its own scorer.
double likelihood_discrepancy(std::span<const EventSequence> sequences_a,
                              const SequenceScorer& a,
                              std::span<const EventSequence> sequences_b,
                              const SequenceScorer& b);

struct NextEventDivergence {
  double time_distance = 0.0;  // Wasserstein between next-event times
  double mark_distance = 0.0;  // categorical EMD between mark frequencies
  std::vector<Event> reference;  // AR draws
  std::vector<Event> compared;   // SD draws, or a second AR run
};

struct DivergenceOptions {
  std::size_t history_length = 100;
  std::size_t repetitions = 100;
  int gamma = 10;
  std::uint64_t seed = 0;
};

// N AR draws of the event after the first history_length events compared to
// N one-step SD draws; without a draft model the comparison is a second,
// independent AR run.
NextEventDivergence next_event_divergence(const model::Model& target,
                                          const model::Model* draft_model,
                                          std::span<const Event> history,
                                          const DivergenceOptions& options);

// Named scalar metrics in insertion order.
class MetricRecord {
 public:
  void set(const std::string& name, double value);
  std::optional<double> get(const std::string& name) const;
  const std::vector<std::pair<std::string, double>>& entries() const noexcept {
    return entries_;
  }

  // Sets "speedup" = T_AR / T_SD from "t_ar" and "t_sd".
  void set_speedup();

 private:
  std::vector<std::pair<std::string, double>> entries_;
};

// One row per record; every record must carry the same names in the same order.
CsvTable metrics_table(std::span<const MetricRecord> records);

// Columns model_cdf, empirical_cdf.
CsvTable ks_plot_table(const KsReport& report);

}  // namespace tppsd::eval
