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

#include "model/model.h"

#include <algorithm>
#include <cmath>
#include <limits>

#include "core/error.h"
#include "core/numerics.h"
#include "model/encoding.h"

namespace tppsd::model {

namespace {

const double kLogScaleMin = std::log(kScaleMin);
const double kLogScaleMax = std::log(kScaleMax);

double dot(const double* a, const double* b, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += a[i] * b[i];
  return s;
}

// out = W x + b for W stored (rows x cols) row-major.
void affine(const ad::Tensor& w, const double* x, const ad::Tensor* b, double* out) {
  const std::size_t rows = w.rows(), cols = w.cols();
  const double* wp = w.values().data();
  for (std::size_t r = 0; r < rows; ++r) {
    out[r] = dot(wp + r * cols, x, cols) + (b != nullptr ? (*b)[r] : 0.0);
  }
}

}  // namespace

std::vector<double> temporal_encoding(double t, const ModelConfig& config,
                                      std::span<const double> sahp_frequency) {
  const auto d = static_cast<std::size_t>(config.dim);
  std::vector<double> z(d);
  if (config.encoding == Encoding::kSahp && sahp_frequency.size() != d) {
    throw_usage("temporal_encoding: SAHP needs D learned frequencies");
  }
  for (std::size_t j = 0; j < d; ++j) {
    const double arg = config.encoding == Encoding::kSahp
                           ? encoding_phase(j, config) + sahp_frequency[j] * t
                           : encoding_rate(j, config) * t;
    z[j] = encoding_uses_cosine(j, config) ? std::cos(arg) : std::sin(arg);
  }
  return z;
}

Model::Model(Checkpoint checkpoint) : ckpt_(std::move(checkpoint)) { ckpt_.validate(); }

ad::Tensor Model::embed(std::span<const Event> events) const {
  const ModelConfig& c = ckpt_.config;
  const auto d = static_cast<std::size_t>(c.dim);
  const ad::Tensor& w = ckpt_.at(param::kMarkEmbedding);
  std::span<const double> freq;
  if (c.encoding == Encoding::kSahp) freq = ckpt_.at(param::kSahpFrequency).values();
  ad::Tensor x(events.size(), d);
  for (std::size_t i = 0; i < events.size(); ++i) {
    const int k = events[i].mark;
    if (k < 0 || k >= c.num_marks) {
      throw_data("mark out of range at index " + std::to_string(i));
    }
    const auto z = temporal_encoding(events[i].time, c, freq);
    for (std::size_t j = 0; j < d; ++j) x(i, j) = w(static_cast<std::size_t>(k), j) + z[j];
  }
  return x;
}

ad::Tensor Model::encode(std::span<const Event> events) const {
  const ModelConfig& c = ckpt_.config;
  const std::size_t n = events.size();
  const auto d = static_cast<std::size_t>(c.dim);
  const auto heads = static_cast<std::size_t>(c.num_heads);
  const auto hd = static_cast<std::size_t>(c.head_dim());
  const bool attnhp = c.attention == Attention::kAttNhp;
  const auto in_dim = static_cast<std::size_t>(c.attention_input_dim());
  const double score_scale = 1.0 / std::sqrt(static_cast<double>(hd));

  ad::Tensor h = embed(events);
  if (n == 0) return h;

  // AttNHP attention reads concat(1, z(t_i), h_i); the first D + 1 columns
  // never change across layers.
  ad::Tensor input;
  if (attnhp) {
    input = ad::Tensor(n, in_dim);
    std::span<const double> freq;
    if (c.encoding == Encoding::kSahp) freq = ckpt_.at(param::kSahpFrequency).values();
    for (std::size_t i = 0; i < n; ++i) {
      input(i, 0) = 1.0;
      const auto z = temporal_encoding(events[i].time, c, freq);
      std::copy(z.begin(), z.end(), &input(i, 1));
    }
  }

  ad::Tensor q(n, d), k(n, d), v(n, d), out(n, d);
  std::vector<double> weights(n);
  for (int layer = 0; layer < c.num_layers; ++layer) {
    const ad::Tensor& wq = ckpt_.at(param::query(layer));
    const ad::Tensor& wk = ckpt_.at(param::key(layer));
    const ad::Tensor& wv = ckpt_.at(param::value(layer));
    for (std::size_t i = 0; i < n; ++i) {
      const double* x = &h(i, 0);
      if (attnhp) {
        std::copy(x, x + d, &input(i, d + 1));
        x = &input(i, 0);
      }
      affine(wq, x, nullptr, &q(i, 0));
      affine(wk, x, nullptr, &k(i, 0));
      affine(wv, x, nullptr, &v(i, 0));
    }
    out.fill(0.0);
    for (std::size_t hh = 0; hh < heads; ++hh) {
      const std::size_t off = hh * hd;
      for (std::size_t i = 0; i < n; ++i) {
        double hi = attnhp ? 0.0 : -std::numeric_limits<double>::infinity();
        for (std::size_t j = 0; j <= i; ++j) {
          weights[j] = dot(&q(i, off), &k(j, off), hd) * score_scale;
          hi = std::max(hi, weights[j]);
        }
        // AttNHP normalises by 1 + sum f, i.e. an extra zero score.
        double total = attnhp ? std::exp(-hi) : 0.0;
        for (std::size_t j = 0; j <= i; ++j) total += (weights[j] = std::exp(weights[j] - hi));
        double* o = &out(i, off);
        for (std::size_t j = 0; j <= i; ++j) {
          const double a = weights[j] / total;
          const double* vj = &v(j, off);
          for (std::size_t e = 0; e < hd; ++e) o[e] += a * vj[e];
        }
      }
    }
    for (std::size_t i = 0; i < h.size(); ++i) {
      h[i] += attnhp ? std::tanh(out[i]) : out[i];
    }
  }
  return h;
}

MixtureParams Model::mixture_head(std::span<const double> h) const {
  const ModelConfig& c = ckpt_.config;
  const auto d = static_cast<std::size_t>(c.dim);
  const auto m = static_cast<std::size_t>(c.num_components);
  if (h.size() != d) throw_usage("mixture_head: embedding has wrong length");
  std::vector<double> e(3 * d);
  affine(ckpt_.at(param::kDecoder), h.data(), nullptr, e.data());

  std::vector<double> logits(m), means(m), scales(m);
  affine(ckpt_.at(param::kWeightProj), e.data(), &ckpt_.at(param::kWeightBias), logits.data());
  affine(ckpt_.at(param::kMeanProj), e.data() + d, &ckpt_.at(param::kMeanBias), means.data());
  affine(ckpt_.at(param::kScaleProj), e.data() + 2 * d, &ckpt_.at(param::kScaleBias),
         scales.data());
  const double lse = log_sum_exp(logits);
  for (std::size_t i = 0; i < m; ++i) {
    logits[i] -= lse;
    scales[i] = std::exp(std::clamp(scales[i], kLogScaleMin, kLogScaleMax));
  }
  return MixtureParams::from_log_weights(std::move(logits), std::move(means),
                                         std::move(scales));
}

MarkDistribution Model::mark_head(std::span<const double> h) const {
  const ModelConfig& c = ckpt_.config;
  const auto d = static_cast<std::size_t>(c.dim);
  const auto k = static_cast<std::size_t>(c.num_marks);
  if (h.size() != d) throw_usage("mark_head: embedding has wrong length");
  std::vector<double> hidden(d), logits(k);
  affine(ckpt_.at(param::kMarkHidden), h.data(), &ckpt_.at(param::kMarkHiddenBias),
         hidden.data());
  for (double& x : hidden) x = std::tanh(x);
  affine(ckpt_.at(param::kMarkOut), hidden.data(), &ckpt_.at(param::kMarkOutBias),
         logits.data());
  const double lse = log_sum_exp(logits);
  MarkDistribution f;
  f.probs.resize(k);
  for (std::size_t i = 0; i < k; ++i) f.probs[i] = std::exp(logits[i] - lse);
  return f;
}

std::vector<NextEventDistribution> Model::next_event_distributions(
    std::span<const Event> events, std::size_t first_prefix, std::size_t last_prefix) const {
  if (first_prefix > last_prefix || last_prefix > events.size()) {
    throw_usage("next_event_distributions: prefix range out of bounds");
  }
  const ad::Tensor h = encode(events.first(last_prefix));
  const std::span<const double> begin = ckpt_.at(param::kBeginContext).values();
  std::vector<NextEventDistribution> out;
  out.reserve(last_prefix - first_prefix + 1);
  for (std::size_t p = first_prefix; p <= last_prefix; ++p) {
    const std::span<const double> row = p == 0 ? begin : h.row_span(p - 1);
    out.push_back(NextEventDistribution{mixture_head(row), mark_head(row)});
  }
  return out;
}

NextEventDistribution Model::next_event(std::span<const Event> events) const {
  return std::move(next_event_distributions(events, events.size(), events.size()).front());
}

double Model::sequence_loglik(const EventSequence& seq) const {
  require_valid(seq, ckpt_.config.num_marks);
  const std::size_t n = seq.events.size();
  const auto dists = next_event_distributions(seq.events, 0, n);
  double ll = 0.0;
  double prev = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const Event& e = seq.events[i];
    const double tau = e.time - prev;
    if (!(tau > 0.0)) throw_data("non-positive interval at index " + std::to_string(i));
    ll += mixture_logpdf(tau, dists[i].interval);
    ll += std::log(dists[i].mark.probs[static_cast<std::size_t>(e.mark)]);
    prev = e.time;
  }
  ll += mixture_log_survival(seq.t_end - prev, dists[n].interval);
  return ll;
}

}  // namespace tppsd::model
