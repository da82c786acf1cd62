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
#include <span>
#include <string>
#include <vector>

#include "autodiff/tensor.h"
#include "core/csv.h"
#include "core/event.h"
#include "model/checkpoint.h"

namespace tppsd::train {

struct TrainConfig {
  double learning_rate = 1e-3;
  std::size_t batch_size = 16;
  std::size_t max_epochs = 200;
  std::size_t patience = 20;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  std::uint64_t seed = 0;

  // Throws Error(kUsage) on a non-positive field, beta outside (0, 1) or
  // patience above max_epochs.
  void validate() const;
};

std::string train_config_to_json(const TrainConfig& config);
TrainConfig train_config_from_json(const std::string& text);
TrainConfig load_train_config(const std::string& path);

struct BatchLoss {
  double value = 0.0;  // -sum loglik / max(1, events)
  std::size_t events = 0;
  std::vector<ad::Tensor> grads;  // parameter_names() order
};

// Negative mean-per-event log-likelihood of the batch and its gradient.
// Sequences are scored individually, so no padding enters the sum.
BatchLoss nll_batch(const model::Checkpoint& ckpt, std::span<const EventSequence> batch);

struct AdamState {
  std::vector<ad::Tensor> first_moment;
  std::vector<ad::Tensor> second_moment;
  std::size_t step = 0;
};

// Bias-corrected Adam descent step. Zero-initialises empty state. Throws
// Error(kNumeric) on a non-finite gradient.
void adam_step(std::vector<ad::Tensor>& params, std::span<const ad::Tensor> grads,
               AdamState& state, const TrainConfig& config);

struct EpochRecord {
  std::size_t epoch = 0;  // 1-based
  double train_loglik = 0.0;  // mean per event, accumulated over the epoch's batches
  double val_loglik = 0.0;    // mean per event at the end of the epoch
};

struct TrainReport {
  std::vector<EpochRecord> epochs;
  std::size_t best_epoch = 0;
  double best_val_loglik = 0.0;
  model::Checkpoint checkpoint;  // parameters at best_epoch

  // Columns epoch, train_loglik, val_loglik, best_val_loglik.
  CsvTable table() const;
};

// Trains from initialize_checkpoint(model_config, config.seed).
TrainReport train(std::span<const EventSequence> train_set, std::span<const EventSequence> val_set,
                  const model::ModelConfig& model_config, const TrainConfig& config);

// Trains from the given initial parameters.
TrainReport train(std::span<const EventSequence> train_set, std::span<const EventSequence> val_set,
                  model::Checkpoint initial, const TrainConfig& config);

struct DatasetSplit {
  std::vector<EventSequence> train;
  std::vector<EventSequence> val;
  std::vector<EventSequence> test;
};

// Contiguous 80/10/10 split: floor(0.8 n) / floor(0.1 n) / rest. Throws
// Error(kData) when a split would be empty.
DatasetSplit split_dataset(std::vector<EventSequence> sequences);

}  // namespace tppsd::train
