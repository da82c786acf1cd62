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

#include "autodiff/grad_check.h"

#include <algorithm>
#include <cmath>

#include "core/error.h"

namespace tppsd::ad {

double value_and_grad(const ScalarFunction& f, std::span<const Tensor> params,
                      std::vector<Tensor>* grads) {
  Tape tape;
  std::vector<Var> vars;
  vars.reserve(params.size());
  for (const Tensor& p : params) vars.push_back(tape.variable(p));
  const Var out = f(tape, vars);
  const double value = out.value().item();
  if (grads != nullptr) {
    tape.backward(out);
    grads->clear();
    for (const Var& v : vars) grads->push_back(v.grad());
  }
  return value;
}

GradCheckResult grad_check(const ScalarFunction& f, std::vector<Tensor> params) {
  std::size_t total = 0;
  for (const Tensor& p : params) total += p.size();
  if (total > 10000) throw_usage("grad_check: more than 10^4 parameter entries");

  std::vector<Tensor> analytic;
  value_and_grad(f, params, &analytic);
  for (const Tensor& g : analytic) {
    if (!g.all_finite()) throw_numeric("grad_check: non-finite gradient");
  }

  GradCheckResult result;
  for (std::size_t k = 0; k < params.size(); ++k) {
    for (std::size_t i = 0; i < params[k].size(); ++i) {
      const double theta = params[k][i];
      const double h = 1e-5 * std::max(1.0, std::abs(theta));
      params[k][i] = theta + h;
      const double up = value_and_grad(f, params, nullptr);
      params[k][i] = theta - h;
      const double down = value_and_grad(f, params, nullptr);
      params[k][i] = theta;
      const double numeric = (up - down) / (2.0 * h);
      const double err =
          std::abs(analytic[k][i] - numeric) / std::max(1e-8, std::abs(numeric));
      if (err > result.max_rel_error) {
        result = GradCheckResult{err, k, i};
      }
    }
  }
  return result;
}

}  // namespace tppsd::ad
