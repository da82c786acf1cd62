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
#include <cstddef>

#include "model/config.h"

namespace tppsd::model {

// Output scale sigma is clamped to this range after the exponential.
inline constexpr double kScaleMin = 1e-4;
inline constexpr double kScaleMax = 1e4;

// Per-dimension pieces of the temporal encodings, j 0-based:
//   THP:    sin(t / 10000^(j/D)) for even j, cos(t / 10000^((j-1)/D)) for odd j
//   SAHP:   sin(j / 10000^(j/D) + w_j t), cos(j / 10000^((j-1)/D) + w_j t)
//   AttNHP: sin(t / (m (5M/m)^(j'/D))) with j' = j rounded down to even,
//           sine in both parities.
inline double encoding_exponent(std::size_t j, const ModelConfig& c) {
  const std::size_t even = j - (j % 2);
  return static_cast<double>(even) / static_cast<double>(c.dim);
}

// Angular rate multiplying t (THP and AttNHP).
inline double encoding_rate(std::size_t j, const ModelConfig& c) {
  const double e = encoding_exponent(j, c);
  if (c.encoding == Encoding::kAttNhp) {
    return 1.0 / (c.attnhp_m * std::pow(5.0 * c.attnhp_scale / c.attnhp_m, e));
  }
  return 1.0 / std::pow(10000.0, e);
}

// Constant phase for SAHP.
inline double encoding_phase(std::size_t j, const ModelConfig& c) {
  return static_cast<double>(j) / std::pow(10000.0, encoding_exponent(j, c));
}

inline bool encoding_uses_cosine(std::size_t j, const ModelConfig& c) {
  return c.encoding != Encoding::kAttNhp && j % 2 == 1;
}

}  // namespace tppsd::model
