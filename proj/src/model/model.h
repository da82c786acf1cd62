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
#include <span>
#include <vector>

#include "autodiff/tensor.h"
#include "core/event.h"
#include "model/checkpoint.h"
#include "model/mixture.h"

namespace tppsd::model {

// Temporal encoding z(t) of length D. sahp_frequency is required (length D)
// for the SAHP variant and ignored otherwise.
std::vector<double> temporal_encoding(double t, const ModelConfig& config,
                                      std::span<const double> sahp_frequency = {});

struct NextEventDistribution {
  MixtureParams interval;
  MarkDistribution mark;
};

// Inference-only forward pass over an immutable checkpoint. Each call
// recomputes the full prefix; there is no key/value cache.
class Model {
 public:
  explicit Model(Checkpoint checkpoint);

  const ModelConfig& config() const noexcept { return ckpt_.config; }
  const Checkpoint& checkpoint() const noexcept { return ckpt_; }

  // Row i = W^T onehot(k_i) + z(t_i).
  ad::Tensor embed(std::span<const Event> events) const;

  // Causal encoder output, one D-vector per event. Row i depends only on
  // events 0..i.
  ad::Tensor encode(std::span<const Event> events) const;

  MixtureParams mixture_head(std::span<const double> h) const;
  MarkDistribution mark_head(std::span<const double> h) const;

  // Distributions of the next event after each prefix length p in
  // [first_prefix, last_prefix]; prefix 0 uses the learned begin context.
  // Only events[0, last_prefix) are encoded, in a single pass.
  std::vector<NextEventDistribution> next_event_distributions(
      std::span<const Event> events, std::size_t first_prefix,
      std::size_t last_prefix) const;

  // Distribution after the whole of events.
  NextEventDistribution next_event(std::span<const Event> events) const;

  // sum_i [log g(tau_i | H_{i-1}) + log f(k_i | H_{i-1})] + log(1 - G(T - t_N | H_N)).
  double sequence_loglik(const EventSequence& seq) const;

 private:
  Checkpoint ckpt_;
};

}  // namespace tppsd::model
