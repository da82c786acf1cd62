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

#include <functional>
#include <span>
#include <vector>

#include "autodiff/tape.h"

namespace tppsd::ad {

// Builds a scalar on the tape from variables holding the parameters.
using ScalarFunction = std::function<Var(Tape&, std::span<const Var>)>;

struct GradCheckResult {
  double max_rel_error = 0.0;
  std::size_t worst_param = 0;
  std::size_t worst_index = 0;
};

// Compares reverse-mode gradients against central differences with step
// h = 1e-5 * max(1, |theta|). The per-coordinate error is
// |analytic - numeric| / max(1e-8, |numeric|). Throws on a non-finite
// gradient or more than 10^4 parameter entries.
GradCheckResult grad_check(const ScalarFunction& f, std::vector<Tensor> params);

// Evaluates f and returns its value and gradients.
double value_and_grad(const ScalarFunction& f, std::span<const Tensor> params,
                      std::vector<Tensor>* grads);

}  // namespace tppsd::ad
