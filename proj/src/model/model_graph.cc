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

#include "model/model_graph.h"

#include <cmath>
#include <limits>

#include "core/error.h"
#include "core/numerics.h"
#include "model/encoding.h"

namespace tppsd::model {

using ad::Tape;
using ad::Tensor;
using ad::Var;

namespace {

// x W^T for W stored as (out x in).
Var project(Var x, Var w) { return ad::matmul(x, ad::transpose(w)); }

Var affine_rows(Var x, Var w, Var b) {
  return project(x, w) + ad::broadcast_rows(b, x.rows());
}

Var temporal_encoding_graph(Tape& tape, const GraphParams& params,
                            std::span<const Event> events) {
  const ModelConfig& c = params.config();
  const std::size_t n = events.size();
  const auto d = static_cast<std::size_t>(c.dim);
  if (c.encoding != Encoding::kSahp) {
    Tensor z(n, d);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < d; ++j) {
        const double arg = encoding_rate(j, c) * events[i].time;
        z(i, j) = encoding_uses_cosine(j, c) ? std::cos(arg) : std::sin(arg);
      }
    }
    return tape.constant(std::move(z));
  }
  Tensor times(n, d), phase(n, d), even(n, d), odd(n, d);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < d; ++j) {
      times(i, j) = events[i].time;
      phase(i, j) = encoding_phase(j, c);
      (encoding_uses_cosine(j, c) ? odd : even)(i, j) = 1.0;
    }
  }
  const Var arg = ad::broadcast_rows(params[param::kSahpFrequency], n) *
                      tape.constant(std::move(times)) +
                  tape.constant(std::move(phase));
  return ad::sin(arg) * tape.constant(std::move(even)) +
         ad::cos(arg) * tape.constant(std::move(odd));
}

Tensor causal_mask(std::size_t n) {
  Tensor mask(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) mask(i, j) = -std::numeric_limits<double>::infinity();
  }
  return mask;
}

Tensor one_hot(std::span<const Event> events, int k) {
  Tensor t(events.size(), static_cast<std::size_t>(k));
  for (std::size_t i = 0; i < events.size(); ++i) {
    if (events[i].mark < 0 || events[i].mark >= k) {
      throw_data("mark out of range at index " + std::to_string(i));
    }
    t(i, static_cast<std::size_t>(events[i].mark)) = 1.0;
  }
  return t;
}

}  // namespace

std::vector<std::string> parameter_names(const ModelConfig& config) {
  std::vector<std::string> names;
  for (const auto& spec : expected_tensors(config)) names.push_back(spec.name);
  return names;
}

std::vector<Tensor> parameter_tensors(const Checkpoint& ckpt) {
  std::vector<Tensor> out;
  for (const auto& name : parameter_names(ckpt.config)) out.push_back(ckpt.at(name));
  return out;
}

void assign_parameters(Checkpoint& ckpt, std::span<const Tensor> values) {
  const auto names = parameter_names(ckpt.config);
  if (names.size() != values.size()) throw_usage("assign_parameters: count mismatch");
  for (std::size_t i = 0; i < names.size(); ++i) {
    Tensor& dst = ckpt.at(names[i]);
    if (!dst.same_shape(values[i])) throw_usage("assign_parameters: shape mismatch");
    dst.storage() = values[i].storage();
  }
}

GraphParams::GraphParams(Tape& tape, const Checkpoint& ckpt) : config_(ckpt.config) {
  for (const auto& name : parameter_names(config_)) {
    const Var v = tape.variable(ckpt.at(name));
    by_name_.emplace(name, v);
    ordered_.push_back(v);
  }
}

GraphParams::GraphParams(const ModelConfig& config, std::span<const Var> vars)
    : config_(config) {
  const auto names = parameter_names(config_);
  if (names.size() != vars.size()) throw_usage("GraphParams: parameter count mismatch");
  for (std::size_t i = 0; i < names.size(); ++i) {
    by_name_.emplace(names[i], vars[i]);
    ordered_.push_back(vars[i]);
  }
}

Var GraphParams::operator[](const std::string& name) const {
  auto it = by_name_.find(name);
  if (it == by_name_.end()) throw_usage("unknown parameter '" + name + "'");
  return it->second;
}

Var encode_graph(Tape& tape, const GraphParams& params, std::span<const Event> events) {
  const ModelConfig& c = params.config();
  const std::size_t n = events.size();
  if (n == 0) throw_usage("encode_graph: empty prefix");
  const auto hd = static_cast<std::size_t>(c.head_dim());
  const bool attnhp = c.attention == Attention::kAttNhp;

  const Var z = temporal_encoding_graph(tape, params, events);
  Var h = ad::matmul(tape.constant(one_hot(events, c.num_marks)), params[param::kMarkEmbedding]) + z;

  const Var mask = tape.constant(causal_mask(n));
  const Var ones = tape.constant(Tensor(n, 1, 1.0));
  const Var zero_col = tape.constant(Tensor(n, 1, 0.0));
  const double score_scale = 1.0 / std::sqrt(static_cast<double>(hd));

  for (int layer = 0; layer < c.num_layers; ++layer) {
    Var input = h;
    if (attnhp) {
      const Var parts[] = {ones, z, h};
      input = ad::concat_cols(parts);
    }
    const Var q = project(input, params[param::query(layer)]);
    const Var k = project(input, params[param::key(layer)]);
    const Var v = project(input, params[param::value(layer)]);
    std::vector<Var> head_out;
    for (int head = 0; head < c.num_heads; ++head) {
      const std::size_t off = static_cast<std::size_t>(head) * hd;
      const Var qh = ad::slice_cols(q, off, off + hd);
      const Var kh = ad::slice_cols(k, off, off + hd);
      const Var vh = ad::slice_cols(v, off, off + hd);
      const Var scores = ad::scale(ad::matmul(qh, ad::transpose(kh)), score_scale) + mask;
      Var attn;
      if (attnhp) {
        const Var parts[] = {zero_col, scores};
        attn = ad::slice_cols(ad::softmax_rows(ad::concat_cols(parts)), 1, n + 1);
      } else {
        attn = ad::softmax_rows(scores);
      }
      head_out.push_back(ad::matmul(attn, vh));
    }
    Var out = head_out.size() == 1 ? head_out.front() : ad::concat_cols(head_out);
    if (attnhp) out = ad::tanh(out);
    h = h + out;
  }
  return h;
}

Var sequence_loglik_graph(Tape& tape, const GraphParams& params, const EventSequence& seq) {
  const ModelConfig& c = params.config();
  require_valid(seq, c.num_marks);
  const std::size_t n = seq.events.size();
  const auto d = static_cast<std::size_t>(c.dim);
  const auto m = static_cast<std::size_t>(c.num_components);

  // Row p is the history embedding after p events; row 0 is the begin context.
  Var hist = params[param::kBeginContext];
  if (n > 0) {
    const Var parts[] = {hist, encode_graph(tape, params, seq.events)};
    hist = ad::concat_rows(parts);
  }
  const std::size_t rows = n + 1;

  const Var e = project(hist, params[param::kDecoder]);
  const Var log_w = ad::log_softmax_rows(
      affine_rows(ad::slice_cols(e, 0, d), params[param::kWeightProj], params[param::kWeightBias]));
  const Var mu =
      affine_rows(ad::slice_cols(e, d, 2 * d), params[param::kMeanProj], params[param::kMeanBias]);
  const Var log_sigma = ad::clamp(
      affine_rows(ad::slice_cols(e, 2 * d, 3 * d), params[param::kScaleProj],
                  params[param::kScaleBias]),
      std::log(kScaleMin), std::log(kScaleMax));
  const Var inv_sigma = ad::exp(ad::scale(log_sigma, -1.0));

  // Interval densities for events 1..n and the survival term after event n
  // share one standardisation over all rows.
  Tensor log_tau(rows, 1);
  double prev = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double tau = seq.events[i].time - prev;
    if (!(tau > 0.0)) throw_data("non-positive interval at index " + std::to_string(i));
    log_tau[i] = std::log(tau);
    prev = seq.events[i].time;
  }
  const double tail = seq.t_end - prev;
  log_tau[n] = tail > 0.0 ? std::log(tail) : 0.0;
  const Var log_tau_b = ad::broadcast_cols(tape.constant(log_tau), m);
  const Var zscore = (log_tau_b - mu) * inv_sigma;

  Var total = tape.constant(Tensor(1, 1, 0.0));
  if (n > 0) {
    const Var comp = ad::slice_rows(log_w - log_sigma - ad::scale(ad::square(zscore), 0.5) -
                                        log_tau_b,
                                    0, n);
    const Var log_g = ad::logsumexp_rows(ad::add_scalar(comp, -kLogSqrt2Pi));
    total = total + ad::sum(log_g);

    const Var h_prev = ad::slice_rows(hist, 0, n);
    const Var hidden =
        ad::tanh(affine_rows(h_prev, params[param::kMarkHidden], params[param::kMarkHiddenBias]));
    const Var log_f = ad::log_softmax_rows(
        affine_rows(hidden, params[param::kMarkOut], params[param::kMarkOutBias]));
    total = total + ad::sum(log_f * tape.constant(one_hot(seq.events, c.num_marks)));
  }
  if (tail > 0.0) {
    const Var surv_terms = ad::slice_rows(log_w, n, rows) +
                           ad::log_normal_cdf(ad::scale(ad::slice_rows(zscore, n, rows), -1.0));
    total = total + ad::logsumexp_rows(surv_terms);
  }
  return total;
}

}  // namespace tppsd::model
