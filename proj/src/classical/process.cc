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

#include "classical/process.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "core/error.h"
#include "core/log.h"

namespace tppsd::classical {

namespace {

constexpr double kPi = std::numbers::pi;

double poisson_rate(const PoissonParams& p, double t) {
  return p.A * (p.b + std::sin(p.omega * kPi * t));
}

double poisson_integral(const PoissonParams& p, double t0, double t1) {
  double value = p.A * p.b * (t1 - t0);
  if (p.omega != 0.0) {
    value -= p.A / (p.omega * kPi) *
             (std::cos(p.omega * kPi * t1) - std::cos(p.omega * kPi * t0));
  }
  return value;
}

// Running excitation sums for exponential kernels:
//   exc[i][j] = sum over past events s of type i of exp(-beta_ij (now - t_s)).
class HawkesState {
 public:
  explicit HawkesState(const HawkesParams& p)
      : p_(p), d_(p.dim()), exc_(d_ * d_, 0.0) {}

  double now() const noexcept { return now_; }

  void advance(double t) {
    const double dt = t - now_;
    if (dt > 0.0) {
      for (std::size_t i = 0; i < d_; ++i) {
        for (std::size_t j = 0; j < d_; ++j) {
          exc_[i * d_ + j] *= std::exp(-p_.beta[i][j] * dt);
        }
      }
    }
    now_ = t;
  }

  void add_event(int type) {
    const auto i = static_cast<std::size_t>(type);
    for (std::size_t j = 0; j < d_; ++j) exc_[i * d_ + j] += 1.0;
  }

  void intensity(std::vector<double>& out) const {
    out.assign(p_.mu.begin(), p_.mu.end());
    for (std::size_t i = 0; i < d_; ++i) {
      for (std::size_t j = 0; j < d_; ++j) out[j] += p_.alpha[i][j] * exc_[i * d_ + j];
    }
  }

  // Integral of each lambda_j from now to t1 with no events in between.
  void compensator_to(double t1, std::vector<double>& out) const {
    const double dt = t1 - now_;
    out.resize(d_);
    for (std::size_t j = 0; j < d_; ++j) out[j] = p_.mu[j] * dt;
    for (std::size_t i = 0; i < d_; ++i) {
      for (std::size_t j = 0; j < d_; ++j) {
        const double e = exc_[i * d_ + j];
        if (e == 0.0) continue;
        out[j] += p_.alpha[i][j] / p_.beta[i][j] * e *
                  -std::expm1(-p_.beta[i][j] * dt);
      }
    }
  }

 private:
  const HawkesParams& p_;
  std::size_t d_;
  std::vector<double> exc_;
  double now_ = 0.0;
};

void validate_hawkes(const HawkesParams& p) {
  const std::size_t d = p.dim();
  if (d == 0) throw_usage("hawkes: mu must be non-empty");
  if (p.alpha.size() != d || p.beta.size() != d) {
    throw_usage("hawkes: alpha and beta must be " + std::to_string(d) + "x" +
                std::to_string(d));
  }
  for (std::size_t i = 0; i < d; ++i) {
    if (!(std::isfinite(p.mu[i]) && p.mu[i] >= 0.0)) {
      throw_usage("hawkes: mu must be finite and non-negative");
    }
    if (p.alpha[i].size() != d || p.beta[i].size() != d) {
      throw_usage("hawkes: alpha and beta must be square");
    }
    for (std::size_t j = 0; j < d; ++j) {
      if (!(std::isfinite(p.alpha[i][j]) && p.alpha[i][j] >= 0.0)) {
        throw_usage("hawkes: alpha must be finite and non-negative");
      }
      if (!(std::isfinite(p.beta[i][j]) && p.beta[i][j] > 0.0)) {
        throw_usage("hawkes: beta must be finite and positive");
      }
    }
  }
  const double rho = branching_ratio(p);
  if (rho >= 1.0) {
    std::ostringstream msg;
    msg << "hawkes: branching ratio " << rho
        << " >= 1, process is not stationary";
    warn(msg.str());
  }
}

void require_finite(double x, const char* what) {
  if (!std::isfinite(x)) throw_numeric(std::string("non-finite ") + what);
}

}  // namespace

HawkesParams HawkesParams::univariate(double mu, double alpha, double beta) {
  return HawkesParams{{mu}, {{alpha}}, {{beta}}};
}

double branching_ratio(const HawkesParams& p) {
  const std::size_t d = p.dim();
  std::vector<double> ratio(d * d);
  for (std::size_t i = 0; i < d; ++i) {
    for (std::size_t j = 0; j < d; ++j) ratio[i * d + j] = p.alpha[i][j] / p.beta[i][j];
  }
  // Perron root of a non-negative matrix via power iteration on (R + I),
  // which is primitive and shares the eigenvectors.
  std::vector<double> v(d, 1.0), w(d);
  double lambda = 0.0;
  for (int iter = 0; iter < 2000; ++iter) {
    double norm = 0.0;
    for (std::size_t j = 0; j < d; ++j) {
      w[j] = v[j];
      for (std::size_t i = 0; i < d; ++i) w[j] += ratio[i * d + j] * v[i];
      norm = std::max(norm, w[j]);
    }
    if (norm == 0.0) return 0.0;
    for (std::size_t j = 0; j < d; ++j) v[j] = w[j] / norm;
    if (std::abs(norm - lambda) < 1e-14 * norm) {
      lambda = norm;
      break;
    }
    lambda = norm;
  }
  return lambda - 1.0;
}

GroundTruthProcess::GroundTruthProcess(ProcessParams params)
    : params_(std::move(params)) {
  if (auto* p = std::get_if<PoissonParams>(&params_)) {
    if (!(std::isfinite(p->A) && p->A > 0.0)) throw_usage("poisson: A must be positive");
    if (!std::isfinite(p->b) || !std::isfinite(p->omega)) {
      throw_usage("poisson: b and omega must be finite");
    }
  } else {
    validate_hawkes(std::get<HawkesParams>(params_));
  }
}

int GroundTruthProcess::num_types() const noexcept {
  if (is_poisson()) return 1;
  return static_cast<int>(std::get<HawkesParams>(params_).dim());
}

void GroundTruthProcess::check_horizon(double t_end) const {
  const auto* p = std::get_if<PoissonParams>(&params_);
  if (p == nullptr) return;
  constexpr int kGrid = 10000;
  for (int g = 0; g <= kGrid; ++g) {
    const double t = t_end * g / kGrid;
    if (poisson_rate(*p, t) < 0.0) {
      throw_usage("poisson: intensity is negative at t=" + std::to_string(t));
    }
  }
}

std::vector<double> GroundTruthProcess::intensity(double t,
                                                  std::span<const Event> history) const {
  if (!history.empty() && t < history.back().time) {
    throw_usage("intensity: query time precedes the end of the history");
  }
  if (const auto* p = std::get_if<PoissonParams>(&params_)) {
    return {std::max(0.0, poisson_rate(*p, t))};
  }
  const auto& h = std::get<HawkesParams>(params_);
  std::vector<double> out(h.mu);
  for (const Event& e : history) {
    if (!(e.time < t)) break;
    const auto i = static_cast<std::size_t>(e.mark);
    for (std::size_t j = 0; j < h.dim(); ++j) {
      out[j] += h.alpha[i][j] * std::exp(-h.beta[i][j] * (t - e.time));
    }
  }
  return out;
}

std::vector<double> GroundTruthProcess::compensator(double t0, double t1,
                                                    std::span<const Event> history) const {
  if (t1 < t0) throw_usage("compensator: t1 < t0");
  if (const auto* p = std::get_if<PoissonParams>(&params_)) {
    return {poisson_integral(*p, t0, t1)};
  }
  const auto& h = std::get<HawkesParams>(params_);
  std::vector<double> out(h.dim());
  for (std::size_t j = 0; j < h.dim(); ++j) out[j] = h.mu[j] * (t1 - t0);
  for (const Event& e : history) {
    if (e.time > t0) {
      if (e.time < t1) throw_usage("compensator: history has events inside (t0, t1)");
      break;
    }
    const auto i = static_cast<std::size_t>(e.mark);
    for (std::size_t j = 0; j < h.dim(); ++j) {
      const double b = h.beta[i][j];
      out[j] += h.alpha[i][j] / b *
                (std::exp(-b * (t0 - e.time)) - std::exp(-b * (t1 - e.time)));
    }
  }
  return out;
}

EventSequence GroundTruthProcess::sample(double t_end, RngStream& rng) const {
  if (!(t_end > 0.0)) throw_usage("sample: t_end must be positive");
  EventSequence seq;
  seq.t_end = t_end;

  if (const auto* p = std::get_if<PoissonParams>(&params_)) {
    check_horizon(t_end);
    const double bound = p->A * (p->b + 1.0);
    if (!(bound > 0.0)) return seq;
    double t = 0.0;
    while (true) {
      t += -std::log1p(-rng.uniform01()) / bound;
      if (t > t_end) break;
      const double rate = poisson_rate(*p, t);
      require_finite(rate, "intensity during thinning");
      if (rng.uniform01() * bound < rate) seq.events.push_back(Event{t, 0});
    }
    return seq;
  }

  const auto& h = std::get<HawkesParams>(params_);
  HawkesState state(h);
  std::vector<double> rates;
  state.intensity(rates);
  double bound = 0.0;
  for (double r : rates) bound += r;
  double t = 0.0;
  while (bound > 0.0) {
    require_finite(bound, "intensity bound during thinning");
    t += -std::log1p(-rng.uniform01()) / bound;
    if (t > t_end) break;
    state.advance(t);
    state.intensity(rates);
    double total = 0.0;
    for (double r : rates) total += r;
    require_finite(total, "intensity during thinning");
    if (rng.uniform01() * bound < total) {
      const auto mark = static_cast<int>(rng.categorical(rates));
      seq.events.push_back(Event{t, mark});
      state.add_event(mark);
      state.intensity(rates);
      total = 0.0;
      for (double r : rates) total += r;
    }
    // Exponential kernels only decay until the next event.
    bound = total;
  }
  return seq;
}

double GroundTruthProcess::log_likelihood(const EventSequence& seq) const {
  require_valid(seq, num_types());
  double ll = 0.0;
  if (const auto* p = std::get_if<PoissonParams>(&params_)) {
    for (const Event& e : seq.events) {
      const double rate = poisson_rate(*p, e.time);
      if (!(rate > 0.0)) return -std::numeric_limits<double>::infinity();
      ll += std::log(rate);
    }
    return ll - poisson_integral(*p, 0.0, seq.t_end);
  }
  const auto& h = std::get<HawkesParams>(params_);
  HawkesState state(h);
  std::vector<double> rates, comp;
  for (const Event& e : seq.events) {
    state.compensator_to(e.time, comp);
    for (double c : comp) ll -= c;
    state.advance(e.time);
    state.intensity(rates);
    const double rate = rates[static_cast<std::size_t>(e.mark)];
    if (!(rate > 0.0)) return -std::numeric_limits<double>::infinity();
    ll += std::log(rate);
    state.add_event(e.mark);
  }
  state.compensator_to(seq.t_end, comp);
  for (double c : comp) ll -= c;
  return ll;
}

std::vector<double> GroundTruthProcess::rescaled_intervals(const EventSequence& seq) const {
  std::vector<double> z;
  z.reserve(seq.events.size());
  if (const auto* p = std::get_if<PoissonParams>(&params_)) {
    double prev = 0.0;
    for (const Event& e : seq.events) {
      z.push_back(poisson_integral(*p, prev, e.time));
      prev = e.time;
    }
    return z;
  }
  const auto& h = std::get<HawkesParams>(params_);
  HawkesState state(h);
  std::vector<double> comp;
  for (const Event& e : seq.events) {
    state.compensator_to(e.time, comp);
    double total = 0.0;
    for (double c : comp) total += c;
    z.push_back(total);
    state.advance(e.time);
    state.add_event(e.mark);
  }
  return z;
}

std::vector<EventSequence> make_synthetic_dataset(const GroundTruthProcess& process,
                                                  std::size_t n_sequences, double t_end,
                                                  std::uint64_t seed) {
  if (n_sequences < 1) throw_usage("n must be >= 1");
  process.check_horizon(t_end);
  std::vector<EventSequence> out;
  out.reserve(n_sequences);
  for (std::size_t i = 0; i < n_sequences; ++i) {
    RngStream rng(seed, i);
    out.push_back(process.sample(t_end, rng));
  }
  return out;
}

PoissonParams reference_poisson() { return PoissonParams{5.0, 1.0, 1.0 / 50.0}; }

HawkesParams reference_hawkes() { return HawkesParams::univariate(2.5, 1.0, 2.0); }

HawkesParams reference_multi_hawkes() {
  return HawkesParams{{0.4, 0.4}, {{1.0, 0.5}, {0.1, 1.0}}, {{2.0, 2.0}, {2.0, 2.0}}};
}

}  // namespace tppsd::classical
