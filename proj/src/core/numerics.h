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

#include <cmath>
#include <numbers>
#include <span>

namespace tppsd {

inline constexpr double kLogSqrt2Pi = 0.91893853320467274178;

// Log-ratios are clamped to this range before exponentiation.
inline constexpr double kMinLogRatio = -745.0;
inline constexpr double kMaxLogRatio = 709.0;

inline double exp_log_ratio(double log_ratio) {
  if (std::isnan(log_ratio)) return log_ratio;
  if (log_ratio < kMinLogRatio) log_ratio = kMinLogRatio;
  if (log_ratio > kMaxLogRatio) log_ratio = kMaxLogRatio;
  return std::exp(log_ratio);
}

double log_sum_exp(std::span<const double> xs);

// Standard normal CDF via erfc.
inline double normal_cdf(double x) {
  return 0.5 * std::erfc(-x / std::numbers::sqrt2);
}

inline double normal_log_pdf(double x) { return -0.5 * x * x - kLogSqrt2Pi; }

// log Phi(x), accurate far into the lower tail.
double log_normal_cdf(double x);

// d/dx log Phi(x) = phi(x) / Phi(x).
double normal_hazard_ratio(double x);

}  // namespace tppsd
