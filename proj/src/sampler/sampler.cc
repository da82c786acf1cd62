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

#include "sampler/sampler.h"

#include <chrono>
#include <cmath>
#include <limits>
#include <string>

#include "core/error.h"
#include "core/log.h"
#include "core/numerics.h"

namespace tppsd::sampler {
namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

// Strictly later than prev even when tau is below the spacing of doubles at prev.
double advance(double prev, double tau) {
  const double t = prev + tau;
  return t > prev ? t : std::nextafter(prev, std::numeric_limits<double>::infinity());
}

double last_time(std::span<const Event> events) {
  return events.empty() ? 0.0 : events.back().time;
}

void check_history(const Model& model, std::span<const Event> history, double t_end) {
  if (!(t_end > 0.0) || !std::isfinite(t_end)) throw_usage("t_end must be positive and finite");
  EventSequence seq{std::vector<Event>(history.begin(), history.end()), t_end};
  require_valid(seq, model.config().num_marks);
}

int mark_from_residual_or_target(const MarkDistribution& target, const MarkDistribution& draft,
                                 RngStream& rng, SampleRunStats& stats) {
  double mass = 0.0;
  for (std::size_t k = 0; k < target.size(); ++k) {
    mass += std::max(0.0, target.probs[k] - draft.probs[k]);
  }
  if (mass > 0.0) return residual_mark_sample(target, draft, rng);
  ++stats.residual_fallbacks;
  warn("mark residual has zero mass; drawing from the target distribution");
  return model::sample_mark(target, rng);
}

}  // namespace

SampleResult ar_sample(const Model& target, double t_end, RngStream& rng,
                       std::span<const Event> history) {
  check_history(target, history, t_end);
  const auto start = Clock::now();
  SampleResult result;
  result.sequence.t_end = t_end;
  auto& events = result.sequence.events;
  events.assign(history.begin(), history.end());
  while (true) {
    const Event next = ar_next_event(target, events, rng);
    ++result.stats.target_forwards;
    if (next.time > t_end) break;
    events.push_back(next);
  }
  result.stats.wall_seconds = seconds_since(start);
  return result;
}

DraftBatch draft(const Model& draft_model, std::span<const Event> history, int gamma,
                 RngStream& rng, SampleRunStats* stats) {
  if (gamma < 1) throw_usage("gamma must be >= 1");
  DraftBatch batch;
  std::vector<Event> prefix(history.begin(), history.end());
  prefix.reserve(prefix.size() + static_cast<std::size_t>(gamma));
  for (int l = 0; l < gamma; ++l) {
    NextEventDistribution next = draft_model.next_event(prefix);
    if (stats) ++stats->draft_forwards;
    const model::IntervalDraw draw = model::sample_interval(next.interval, rng);
    if (!std::isfinite(draw.log_density)) {
      throw_numeric("draft interval log-density is not finite");
    }
    const int mark = model::sample_mark(next.mark, rng);
    const Event event{advance(last_time(prefix), draw.tau), mark};
    prefix.push_back(event);
    batch.intervals.push_back(draw.tau);
    batch.events.push_back(event);
    batch.interval_log_density.push_back(draw.log_density);
    batch.interval_dists.push_back(std::move(next.interval));
    batch.mark_dists.push_back(std::move(next.mark));
  }
  if (stats) stats->events_drafted += batch.size();
  return batch;
}

std::size_t apply_acceptance(std::span<PositionRecord> positions) {
  std::size_t accepted = positions.size();
  for (std::size_t l = 0; l < positions.size(); ++l) {
    PositionRecord& rec = positions[l];
    rec.interval_passed = rec.eps_interval < rec.interval_ratio;
    rec.mark_passed = rec.eps_mark < rec.mark_ratio;
    const bool reachable = accepted == positions.size();
    rec.interval_accepted = reachable && rec.interval_passed;
    rec.mark_accepted = rec.interval_accepted && rec.mark_passed;
    if (reachable && !rec.mark_accepted) accepted = l;
  }
  return accepted;
}

VerificationOutcome verify(const Model& target, std::span<const Event> history,
                           const DraftBatch& batch, RngStream& rng, SampleRunStats* stats) {
  const std::size_t gamma = batch.size();
  if (gamma == 0) throw_usage("draft batch is empty");
  std::vector<Event> events(history.begin(), history.end());
  events.insert(events.end(), batch.events.begin(), batch.events.end());
  const std::size_t base = history.size();

  VerificationOutcome out;
  out.target = target.next_event_distributions(events, base, base + gamma - 1);
  if (stats) ++stats->target_forwards;

  std::vector<double> eps(2 * gamma);
  for (double& e : eps) e = rng.uniform01();

  out.positions.resize(gamma);
  for (std::size_t l = 0; l < gamma; ++l) {
    const double log_target = model::mixture_logpdf(batch.intervals[l], out.target[l].interval);
    const double log_draft = batch.interval_log_density[l];
    if (std::isnan(log_target) || log_target == std::numeric_limits<double>::infinity() ||
        !std::isfinite(log_draft)) {
      throw_numeric("non-finite interval density at drafted position " + std::to_string(l));
    }
    const auto k = static_cast<std::size_t>(batch.events[l].mark);
    const double p_target = out.target[l].mark.probs.at(k);
    const double p_draft = batch.mark_dists[l].probs.at(k);
    if (!std::isfinite(p_target) || !(p_draft > 0.0) || !std::isfinite(p_draft)) {
      throw_numeric("non-finite mark probability at drafted position " + std::to_string(l));
    }
    PositionRecord& rec = out.positions[l];
    rec.interval_ratio = exp_log_ratio(log_target - log_draft);
    rec.mark_ratio = p_target / p_draft;
    rec.eps_interval = eps[l];
    rec.eps_mark = eps[gamma + l];
  }
  out.accepted_length = apply_acceptance(out.positions);
  return out;
}

ResidualDraw residual_interval_sample(const MixtureParams& target, const MixtureParams& draft,
                                      RngStream& rng, std::size_t max_proposals) {
  ResidualDraw out;
  while (out.proposals < max_proposals) {
    ++out.proposals;
    const model::IntervalDraw draw = model::sample_interval(target, rng);
    const double log_draft = model::mixture_logpdf(draw.tau, draft);
    if (std::isnan(draw.log_density) || std::isnan(log_draft)) {
      throw_numeric("non-finite density in residual interval sampling");
    }
    // Acceptance probability 1 - g_D / g_T, clipped at zero.
    const double threshold = -std::expm1(std::min(0.0, log_draft - draw.log_density));
    if (rng.uniform01() < threshold) {
      out.tau = draw.tau;
      return out;
    }
  }
  out.fell_back = true;
  out.tau = model::sample_interval(target, rng).tau;
  warn("residual interval sampler exhausted " + std::to_string(max_proposals) +
       " proposals; drawing from the target distribution");
  return out;
}

std::vector<double> residual_mark_distribution(const MarkDistribution& target,
                                               const MarkDistribution& draft) {
  if (target.size() != draft.size()) throw_usage("mark distributions differ in size");
  std::vector<double> residual(target.size());
  double mass = 0.0;
  for (std::size_t k = 0; k < residual.size(); ++k) {
    residual[k] = std::max(0.0, target.probs[k] - draft.probs[k]);
    mass += residual[k];
  }
  if (!(mass > 0.0) || !std::isfinite(mass)) {
    throw_numeric("mark residual has zero mass");
  }
  for (double& r : residual) r /= mass;
  return residual;
}

int residual_mark_sample(const MarkDistribution& target, const MarkDistribution& draft,
                         RngStream& rng) {
  const std::vector<double> residual = residual_mark_distribution(target, draft);
  return static_cast<int>(rng.categorical(residual));
}

SdStreams::SdStreams(const RngStream& rng)
    : draft(rng.substream(stream_tag::kDraft)),
      verify(rng.substream(stream_tag::kVerify)),
      residual(rng.substream(stream_tag::kResidual)) {}

SdStep sd_step(const Model& target, const Model& draft_model, std::span<const Event> history,
               const SdOptions& options, SdStreams& streams, SampleRunStats& stats) {
  ++stats.iterations;
  const DraftBatch batch = draft(draft_model, history, options.gamma, streams.draft, &stats);
  const VerificationOutcome out = verify(target, history, batch, streams.verify, &stats);
  SdStep step;
  step.accepted = out.accepted_length;
  step.appended.assign(batch.events.begin(),
                       batch.events.begin() + static_cast<std::ptrdiff_t>(step.accepted));
  stats.events_accepted += step.accepted;
  if (!out.replacement_pending()) return step;

  const std::size_t l = step.accepted;
  const PositionRecord& rec = out.positions[l];
  const NextEventDistribution& dist = out.target[l];
  const bool literal = options.policy == RejectionPolicy::kAlg1Literal;
  double tau = batch.intervals[l];
  if (literal || !rec.interval_passed) {
    const ResidualDraw draw =
        residual_interval_sample(dist.interval, batch.interval_dists[l], streams.residual);
    stats.residual_proposals += draw.proposals;
    if (draw.fell_back) ++stats.residual_fallbacks;
    tau = draw.tau;
  }
  int mark = batch.events[l].mark;
  if (literal || !rec.mark_passed) {
    mark = mark_from_residual_or_target(dist.mark, batch.mark_dists[l], streams.residual, stats);
  }
  const double prev = l == 0 ? last_time(history) : step.appended.back().time;
  step.appended.push_back({advance(prev, tau), mark});
  return step;
}

Event ar_next_event(const Model& target, std::span<const Event> history, RngStream& rng) {
  const NextEventDistribution next = target.next_event(history);
  const double tau = model::sample_interval(next.interval, rng).tau;
  const int mark = model::sample_mark(next.mark, rng);
  return {advance(last_time(history), tau), mark};
}

SampleResult tpp_sd_sample(const Model& target, const Model& draft_model, double t_end,
                           const SdOptions& options, RngStream& rng,
                           std::span<const Event> history) {
  if (options.gamma < 1) throw_usage("gamma must be >= 1");
  if (target.config().num_marks != draft_model.config().num_marks) {
    throw_usage("target and draft models disagree on the number of marks");
  }
  check_history(target, history, t_end);
  const auto start = Clock::now();
  SdStreams streams(rng);

  SampleResult result;
  result.sequence.t_end = t_end;
  auto& events = result.sequence.events;
  events.assign(history.begin(), history.end());
  while (true) {
    const SdStep step = sd_step(target, draft_model, events, options, streams, result.stats);
    events.insert(events.end(), step.appended.begin(), step.appended.end());
    if (events.back().time > t_end) break;
  }
  while (!events.empty() && events.back().time > t_end) events.pop_back();
  result.stats.wall_seconds = seconds_since(start);
  return result;
}

}  // namespace tppsd::sampler
