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

#include <span>
#include <vector>

#include "core/rng.h"

namespace tppsd::model {

// Log-normal mixture over inter-event intervals.
struct MixtureParams {
  std::vector<double> weights;
  std::vector<double> means;
  std::vector<double> scales;
  // log(weights), kept separately so tiny weights keep full precision.
  std::vector<double> log_weights;

  std::size_t size() const noexcept { return weights.size(); }
  // Simplex to 1e-9, non-negative weights, positive scales, equal lengths.
  bool valid() const noexcept;

  static MixtureParams from_log_weights(std::vector<double> log_weights,
                                        std::vector<double> means,
                                        std::vector<double> scales);
  static MixtureParams single(double mean, double scale);
};

struct MarkDistribution {
  std::vector<double> probs;

  std::size_t size() const noexcept { return probs.size(); }
  bool valid() const noexcept;
};

// log sum_m w_m LogNormal(tau; mu_m, sigma_m). Throws for tau <= 0.
double mixture_logpdf(double tau, const MixtureParams& p);

// sum_m w_m Phi((log tau - mu_m) / sigma_m); 0 at tau = 0.
double mixture_cdf(double tau, const MixtureParams& p);

// log(1 - G(tau)), evaluated as a log-sum of per-component upper tails.
double mixture_log_survival(double tau, const MixtureParams& p);

struct IntervalDraw {
  double tau;
  double log_density;  // of the full mixture at tau
};

// z ~ Categorical(w), eps ~ N(0, 1), tau = exp(mu_z + sigma_z eps).
IntervalDraw sample_interval(const MixtureParams& p, RngStream& rng);

int sample_mark(const MarkDistribution& f, RngStream& rng);

}  // namespace tppsd::model
