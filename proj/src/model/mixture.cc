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

#include "model/mixture.h"

#include <cmath>

#include "core/error.h"
#include "core/numerics.h"

namespace tppsd::model {

namespace {

constexpr double kSimplexTolerance = 1e-9;

}  // namespace

bool MixtureParams::valid() const noexcept {
  const std::size_t m = weights.size();
  if (m == 0 || means.size() != m || scales.size() != m || log_weights.size() != m) {
    return false;
  }
  double total = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    if (!(weights[i] >= 0.0) || !std::isfinite(means[i]) || !(scales[i] > 0.0) ||
        !std::isfinite(scales[i])) {
      return false;
    }
    total += weights[i];
  }
  return std::abs(total - 1.0) <= kSimplexTolerance;
}

MixtureParams MixtureParams::from_log_weights(std::vector<double> log_weights,
                                              std::vector<double> means,
                                              std::vector<double> scales) {
  MixtureParams p;
  p.weights.resize(log_weights.size());
  for (std::size_t i = 0; i < log_weights.size(); ++i) p.weights[i] = std::exp(log_weights[i]);
  p.log_weights = std::move(log_weights);
  p.means = std::move(means);
  p.scales = std::move(scales);
  return p;
}

MixtureParams MixtureParams::single(double mean, double scale) {
  return from_log_weights({0.0}, {mean}, {scale});
}

bool MarkDistribution::valid() const noexcept {
  if (probs.empty()) return false;
  double total = 0.0;
  for (double p : probs) {
    if (!(p >= 0.0)) return false;
    total += p;
  }
  return std::abs(total - 1.0) <= kSimplexTolerance;
}

double mixture_logpdf(double tau, const MixtureParams& p) {
  if (!(tau > 0.0)) throw_usage("mixture_logpdf: interval must be positive");
  const double log_tau = std::log(tau);
  const std::size_t m = p.size();
  std::vector<double> terms(m);
  for (std::size_t i = 0; i < m; ++i) {
    const double z = (log_tau - p.means[i]) / p.scales[i];
    terms[i] = p.log_weights[i] - std::log(p.scales[i]) - 0.5 * z * z - log_tau - kLogSqrt2Pi;
  }
  return log_sum_exp(terms);
}

double mixture_cdf(double tau, const MixtureParams& p) {
  if (!(tau > 0.0)) return 0.0;
  const double log_tau = std::log(tau);
  double g = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    g += p.weights[i] * normal_cdf((log_tau - p.means[i]) / p.scales[i]);
  }
  return g;
}

double mixture_log_survival(double tau, const MixtureParams& p) {
  if (!(tau > 0.0)) return 0.0;
  const double log_tau = std::log(tau);
  std::vector<double> terms(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) {
    terms[i] = p.log_weights[i] + log_normal_cdf(-(log_tau - p.means[i]) / p.scales[i]);
  }
  return log_sum_exp(terms);
}

IntervalDraw sample_interval(const MixtureParams& p, RngStream& rng) {
  const std::size_t z = rng.categorical(p.weights);
  const double eps = rng.standard_normal();
  const double tau = std::exp(p.means[z] + p.scales[z] * eps);
  if (!(tau > 0.0) || !std::isfinite(tau)) {
    throw_numeric("sampled interval is not a positive finite number");
  }
  return IntervalDraw{tau, mixture_logpdf(tau, p)};
}

int sample_mark(const MarkDistribution& f, RngStream& rng) {
  return static_cast<int>(rng.categorical(f.probs));
}

}  // namespace tppsd::model
