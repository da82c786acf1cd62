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
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "core/event.h"
#include "core/rng.h"

namespace tppsd::classical {

// lambda(t) = A * (b + sin(omega * pi * t)); a single event type.
struct PoissonParams {
  double A = 1.0;
  double b = 1.0;
  double omega = 0.0;
};

// Multivariate Hawkes with exponential kernels. alpha[i][j] and beta[i][j]
// describe how an event of type i excites type j:
//   lambda_j(t) = mu_j + sum_i sum_{s : k_s = i, t_s < t}
//                 alpha[i][j] * exp(-beta[i][j] * (t - t_s)).
struct HawkesParams {
  std::vector<double> mu;
  std::vector<std::vector<double>> alpha;
  std::vector<std::vector<double>> beta;

  std::size_t dim() const noexcept { return mu.size(); }

  static HawkesParams univariate(double mu, double alpha, double beta);
};

using ProcessParams = std::variant<PoissonParams, HawkesParams>;

// Validates parameters at construction. For Poisson processes the
// non-negativity of the intensity can only be checked against a horizon, which
// happens in check_horizon(). A supercritical Hawkes branching matrix only
// produces a warning.
class GroundTruthProcess {
 public:
  explicit GroundTruthProcess(ProcessParams params);

  const ProcessParams& params() const noexcept { return params_; }
  int num_types() const noexcept;
  bool is_poisson() const noexcept {
    return std::holds_alternative<PoissonParams>(params_);
  }

  // Throws if the Poisson intensity is negative anywhere on a 10^4-point grid
  // over [0, t_end].
  void check_horizon(double t_end) const;

  // Per-type rate at t given history events strictly before t.
  std::vector<double> intensity(double t, std::span<const Event> history) const;

  // Per-type integrated intensity over [t0, t1]. History must contain no
  // events in (t0, t1); events at or before t0 contribute excitation.
  std::vector<double> compensator(double t0, double t1,
                                  std::span<const Event> history) const;

  // Ogata thinning on (0, t_end].
  EventSequence sample(double t_end, RngStream& rng) const;

  // Sum of log-intensities at the events minus the total compensator on
  // [0, T]. Returns -infinity if some event has zero intensity.
  double log_likelihood(const EventSequence& seq) const;

  // Summed-over-types compensator increments between consecutive events,
  // the first one integrating from 0.
  std::vector<double> rescaled_intervals(const EventSequence& seq) const;

 private:
  ProcessParams params_;
};

// Spectral radius of the elementwise ratio alpha / beta (the branching matrix).
double branching_ratio(const HawkesParams& p);

std::vector<EventSequence> make_synthetic_dataset(const GroundTruthProcess& process,
                                                  std::size_t n_sequences,
                                                  double t_end,
                                                  std::uint64_t seed);

// Parameter sets used for the three synthetic benchmark datasets.
PoissonParams reference_poisson();
HawkesParams reference_hawkes();
HawkesParams reference_multi_hawkes();

}  // namespace tppsd::classical
