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

#include "train/trainer.h"

#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>

#include "autodiff/tape.h"
#include "core/error.h"
#include "core/rng.h"
#include "json.hpp"
#include "model/model.h"
#include "model/model_graph.h"

namespace tppsd::train {
namespace {

using nlohmann::json;

double mean_val_loglik(const model::Checkpoint& ckpt, std::span<const EventSequence> val) {
  const model::Model m(ckpt);
  double sum = 0.0;
  for (const auto& seq : val) sum += m.sequence_loglik(seq);
  return sum / static_cast<double>(std::max<std::size_t>(1, total_events(val)));
}

}  // namespace

void TrainConfig::validate() const {
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) {
    throw_usage("learning_rate must be positive");
  }
  if (batch_size < 1) throw_usage("batch_size must be >= 1");
  if (max_epochs < 1) throw_usage("max_epochs must be >= 1");
  if (patience < 1) throw_usage("patience must be >= 1");
  if (patience > max_epochs) throw_usage("patience must not exceed max_epochs");
  if (!(beta1 > 0.0 && beta1 < 1.0)) throw_usage("beta1 must lie in (0, 1)");
  if (!(beta2 > 0.0 && beta2 < 1.0)) throw_usage("beta2 must lie in (0, 1)");
  if (!(epsilon > 0.0)) throw_usage("epsilon must be positive");
}

std::string train_config_to_json(const TrainConfig& c) {
  json j = {{"format_version", 1},
            {"learning_rate", c.learning_rate},
            {"batch_size", c.batch_size},
            {"max_epochs", c.max_epochs},
            {"patience", c.patience},
            {"beta1", c.beta1},
            {"beta2", c.beta2},
            {"epsilon", c.epsilon},
            {"seed", c.seed}};
  return j.dump(2);
}

TrainConfig train_config_from_json(const std::string& text) {
  TrainConfig c;
  try {
    const json j = json::parse(text);
    if (!j.is_object()) throw_data("train config must be a JSON object");
    for (const auto& [key, value] : j.items()) {
      if (key == "format_version") {
        if (value.get<int>() != 1) throw_data("unsupported train config format_version");
      } else if (key == "learning_rate") {
        c.learning_rate = value.get<double>();
      } else if (key == "batch_size") {
        c.batch_size = value.get<std::size_t>();
      } else if (key == "max_epochs") {
        c.max_epochs = value.get<std::size_t>();
      } else if (key == "patience") {
        c.patience = value.get<std::size_t>();
      } else if (key == "beta1") {
        c.beta1 = value.get<double>();
      } else if (key == "beta2") {
        c.beta2 = value.get<double>();
      } else if (key == "epsilon") {
        c.epsilon = value.get<double>();
      } else if (key == "seed") {
        c.seed = value.get<std::uint64_t>();
      } else {
        throw_data("unknown train config field: " + key);
      }
    }
  } catch (const json::exception& e) {
    throw_data(std::string("invalid train config: ") + e.what());
  }
  c.validate();
  return c;
}

TrainConfig load_train_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw_data("cannot open train config " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return train_config_from_json(buf.str());
}

BatchLoss nll_batch(const model::Checkpoint& ckpt, std::span<const EventSequence> batch) {
  ad::Tape tape;
  const model::GraphParams params(tape, ckpt);
  BatchLoss out;
  out.events = total_events(batch);
  const double scale = -1.0 / static_cast<double>(std::max<std::size_t>(1, out.events));
  ad::Var total = tape.constant(ad::Tensor::scalar(0.0));
  for (const auto& seq : batch) {
    total = total + model::sequence_loglik_graph(tape, params, seq);
  }
  const ad::Var loss = ad::scale(total, scale);
  tape.backward(loss);
  out.value = loss.value().item();
  if (!std::isfinite(out.value)) throw_numeric("training loss is not finite");
  for (const ad::Var& v : params.ordered()) out.grads.push_back(v.grad());
  return out;
}

void adam_step(std::vector<ad::Tensor>& params, std::span<const ad::Tensor> grads,
               AdamState& state, const TrainConfig& config) {
  if (grads.size() != params.size()) throw_usage("gradient count does not match parameters");
  if (state.first_moment.empty()) {
    for (const auto& p : params) {
      state.first_moment.emplace_back(p.shape(), std::vector<double>(p.size(), 0.0));
      state.second_moment.emplace_back(p.shape(), std::vector<double>(p.size(), 0.0));
    }
  }
  if (state.first_moment.size() != params.size()) throw_usage("optimizer state does not match");
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (grads[i].shape() != params[i].shape()) throw_usage("gradient shape mismatch");
    if (!grads[i].all_finite()) throw_numeric("non-finite gradient");
  }
  ++state.step;
  const double t = static_cast<double>(state.step);
  const double c1 = 1.0 - std::pow(config.beta1, t);
  const double c2 = 1.0 - std::pow(config.beta2, t);
  for (std::size_t i = 0; i < params.size(); ++i) {
    auto p = params[i].values();
    const auto g = grads[i].values();
    auto m = state.first_moment[i].values();
    auto v = state.second_moment[i].values();
    for (std::size_t j = 0; j < p.size(); ++j) {
      m[j] = config.beta1 * m[j] + (1.0 - config.beta1) * g[j];
      v[j] = config.beta2 * v[j] + (1.0 - config.beta2) * g[j] * g[j];
      const double m_hat = m[j] / c1;
      const double v_hat = v[j] / c2;
      p[j] -= config.learning_rate * m_hat / (std::sqrt(v_hat) + config.epsilon);
    }
  }
}

CsvTable TrainReport::table() const {
  CsvTable t({"epoch", "train_loglik", "val_loglik", "best_val_loglik"});
  double best = -std::numeric_limits<double>::infinity();
  for (const auto& e : epochs) {
    best = std::max(best, e.val_loglik);
    t.add_row({std::to_string(e.epoch), format_double(e.train_loglik),
               format_double(e.val_loglik), format_double(best)});
  }
  return t;
}

TrainReport train(std::span<const EventSequence> train_set, std::span<const EventSequence> val_set,
                  const model::ModelConfig& model_config, const TrainConfig& config) {
  config.validate();
  return train(train_set, val_set, model::initialize_checkpoint(model_config, config.seed),
               config);
}

TrainReport train(std::span<const EventSequence> train_set, std::span<const EventSequence> val_set,
                  model::Checkpoint initial, const TrainConfig& config) {
  config.validate();
  initial.validate();
  if (train_set.empty() || val_set.empty()) throw_data("training and validation sets must be nonempty");
  const int k = initial.config.num_marks;
  for (const auto& seq : train_set) require_valid(seq, k);
  for (const auto& seq : val_set) require_valid(seq, k);

  TrainReport report;
  model::Checkpoint current = std::move(initial);
  std::vector<ad::Tensor> params = model::parameter_tensors(current);
  AdamState state;
  RngStream shuffle_rng = RngStream(config.seed, 0).substream(stream_tag::kShuffle);
  std::vector<std::size_t> order(train_set.size());
  std::iota(order.begin(), order.end(), std::size_t{0});

  report.best_val_loglik = -std::numeric_limits<double>::infinity();
  report.checkpoint = current;
  std::size_t since_best = 0;
  for (std::size_t epoch = 1; epoch <= config.max_epochs; ++epoch) {
    // Fisher-Yates with the run's own stream.
    for (std::size_t i = order.size(); i > 1; --i) {
      const std::size_t j = static_cast<std::size_t>(shuffle_rng.next_u64() % i);
      std::swap(order[i - 1], order[j]);
    }
    double loglik_sum = 0.0;
    std::size_t event_sum = 0;
    std::vector<EventSequence> batch;
    for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
      batch.clear();
      const std::size_t stop = std::min(order.size(), start + config.batch_size);
      for (std::size_t i = start; i < stop; ++i) batch.push_back(train_set[order[i]]);
      const BatchLoss loss = nll_batch(current, batch);
      loglik_sum += -loss.value * static_cast<double>(std::max<std::size_t>(1, loss.events));
      event_sum += loss.events;
      adam_step(params, loss.grads, state, config);
      model::assign_parameters(current, params);
    }
    EpochRecord rec;
    rec.epoch = epoch;
    rec.train_loglik = loglik_sum / static_cast<double>(std::max<std::size_t>(1, event_sum));
    rec.val_loglik = mean_val_loglik(current, val_set);
    if (!std::isfinite(rec.val_loglik)) throw_numeric("validation log-likelihood is not finite");
    report.epochs.push_back(rec);
    if (rec.val_loglik > report.best_val_loglik) {
      report.best_val_loglik = rec.val_loglik;
      report.best_epoch = epoch;
      report.checkpoint = current;
      since_best = 0;
    } else if (++since_best >= config.patience) {
      break;
    }
  }
  return report;
}

DatasetSplit split_dataset(std::vector<EventSequence> sequences) {
  const std::size_t n = sequences.size();
  const std::size_t n_train = n * 8 / 10;
  const std::size_t n_val = n / 10;
  if (n_train == 0 || n_val == 0 || n - n_train - n_val == 0) {
    throw_data("dataset of " + std::to_string(n) + " sequences is too small to split 80/10/10");
  }
  DatasetSplit out;
  auto begin = std::make_move_iterator(sequences.begin());
  out.train.assign(begin, begin + static_cast<std::ptrdiff_t>(n_train));
  out.val.assign(begin + static_cast<std::ptrdiff_t>(n_train),
                 begin + static_cast<std::ptrdiff_t>(n_train + n_val));
  out.test.assign(begin + static_cast<std::ptrdiff_t>(n_train + n_val),
                  std::make_move_iterator(sequences.end()));
  return out;
}

}  // namespace tppsd::train
