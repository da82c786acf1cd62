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

#include <map>
#include <span>
#include <string>
#include <vector>

#include "autodiff/tape.h"
#include "core/event.h"
#include "model/checkpoint.h"

namespace tppsd::model {

// Differentiable mirror of Model's forward pass, used for training and
// gradient checks. Parameters live on the tape as named variables.
class GraphParams {
 public:
  // Places every checkpoint tensor on the tape, in expected_tensors() order.
  GraphParams(ad::Tape& tape, const Checkpoint& ckpt);
  // Wraps variables already on a tape (same order as parameter_names()).
  GraphParams(const ModelConfig& config, std::span<const ad::Var> vars);

  const ModelConfig& config() const noexcept { return config_; }
  ad::Var operator[](const std::string& name) const;
  const std::vector<ad::Var>& ordered() const noexcept { return ordered_; }

 private:
  ModelConfig config_;
  std::map<std::string, ad::Var> by_name_;
  std::vector<ad::Var> ordered_;
};

std::vector<std::string> parameter_names(const ModelConfig& config);
std::vector<ad::Tensor> parameter_tensors(const Checkpoint& ckpt);
void assign_parameters(Checkpoint& ckpt, std::span<const ad::Tensor> values);

// N x D encoder output for the events.
ad::Var encode_graph(ad::Tape& tape, const GraphParams& params,
                     std::span<const Event> events);

// Sequence log-likelihood as a 1 x 1 node.
ad::Var sequence_loglik_graph(ad::Tape& tape, const GraphParams& params,
                              const EventSequence& seq);

}  // namespace tppsd::model
