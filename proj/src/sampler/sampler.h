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

#include "core/event.h"
#include "core/rng.h"
#include "model/mixture.h"
#include "model/model.h"

namespace tppsd::sampler {

using model::MarkDistribution;
using model::MixtureParams;
using model::Model;
using model::NextEventDistribution;

struct SampleRunStats {
  double wall_seconds = 0.0;
  std::size_t events_drafted = 0;
  std::size_t events_accepted = 0;
  std::size_t target_forwards = 0;
  std::size_t draft_forwards = 0;
  std::size_t iterations = 0;
  std::size_t residual_proposals = 0;
  std::size_t residual_fallbacks = 0;

  // accepted / drafted; 0 when nothing was drafted.
  double acceptance_rate() const noexcept {
    return events_drafted == 0 ? 0.0
                               : static_cast<double>(events_accepted) /
                                     static_cast<double>(events_drafted);
  }
};

struct SampleResult {
  EventSequence sequence;  // history followed by the sampled continuation
  SampleRunStats stats;
};

// Naive autoregressive sampling: one target forward per event, stopping at
// the first event past t_end (which is discarded).
SampleResult ar_sample(const Model& target, double t_end, RngStream& rng,
                       std::span<const Event> history = {});

// Candidates drafted autoregressively from the draft model, with the draft
// distributions recorded at every position.
struct DraftBatch {
  std::vector<double> intervals;
  std::vector<Event> events;
  std::vector<double> interval_log_density;  // log g_D(tau_l)
  std::vector<MixtureParams> interval_dists;  // g_D at position l
  std::vector<MarkDistribution> mark_dists;   // f_D at position l

  std::size_t size() const noexcept { return events.size(); }
};

DraftBatch draft(const Model& draft_model, std::span<const Event> history, int gamma,
                 RngStream& rng, SampleRunStats* stats = nullptr);

struct PositionRecord {
  double interval_ratio = 0.0;  // g_T / g_D at the drafted interval
  double mark_ratio = 0.0;      // f_T / f_D at the drafted mark
  double eps_interval = 0.0;
  double eps_mark = 0.0;
  bool interval_passed = false;  // eps_interval < interval_ratio
  bool mark_passed = false;      // eps_mark < mark_ratio
  // Interval accepted: every earlier position fully accepted and the test
  // passed. Mark accepted: interval accepted and its own test passed.
  bool interval_accepted = false;
  bool mark_accepted = false;
};

struct VerificationOutcome {
  std::size_t accepted_length = 0;  // L
  std::vector<PositionRecord> positions;
  std::vector<NextEventDistribution> target;  // g_T, f_T per drafted position

  bool replacement_pending() const noexcept { return accepted_length < positions.size(); }
};

// Applies the acceptance tests to records whose ratios and uniforms are
// already filled in; sets the pass/accept flags and returns L.
std::size_t apply_acceptance(std::span<PositionRecord> positions);

// One batched target forward over history + candidates, then the
// acceptance tests with 2 * gamma uniforms drawn from rng.
VerificationOutcome verify(const Model& target, std::span<const Event> history,
                           const DraftBatch& batch, RngStream& rng,
                           SampleRunStats* stats = nullptr);

inline constexpr std::size_t kResidualMaxProposals = 10000;

struct ResidualDraw {
  double tau = 0.0;
  std::size_t proposals = 0;
  bool fell_back = false;
};

// Draws from norm(max(0, g_T - g_D)) by proposing from g_T and accepting
// with probability max(0, g_T - g_D) / g_T. After max_proposals failures it
// returns a plain g_T draw and logs a warning.
ResidualDraw residual_interval_sample(const MixtureParams& target, const MixtureParams& draft,
                                      RngStream& rng,
                                      std::size_t max_proposals = kResidualMaxProposals);

// norm(max(0, f_T - f_D)); throws Error(kNumeric) when the residual has no mass.
std::vector<double> residual_mark_distribution(const MarkDistribution& target,
                                               const MarkDistribution& draft);
int residual_mark_sample(const MarkDistribution& target, const MarkDistribution& draft,
                         RngStream& rng);

enum class RejectionPolicy {
  // Replace only the component that failed at position L.
  kPositionwise,
  // Resample both interval and mark from the adjusted distributions whenever
  // L < gamma, discarding an interval that had already passed. Kept for
  // comparison; the resulting law differs from the target's.
  kAlg1Literal,
};

struct SdOptions {
  int gamma = 10;
  RejectionPolicy policy = RejectionPolicy::kPositionwise;
};

// Independent sources consumed by drafting, verification and residual draws.
struct SdStreams {
  RngStream draft;
  RngStream verify;
  RngStream residual;

  explicit SdStreams(const RngStream& rng);
};

struct SdStep {
  std::vector<Event> appended;  // L accepted events plus the replacement, if any
  std::size_t accepted = 0;     // L
};

// One draft-verify iteration after history; appends nothing to history.
SdStep sd_step(const Model& target, const Model& draft_model, std::span<const Event> history,
               const SdOptions& options, SdStreams& streams, SampleRunStats& stats);

// One draw of the event following history from the target distribution.
Event ar_next_event(const Model& target, std::span<const Event> history, RngStream& rng);

// Speculative sampling: draft gamma events, verify them with one target
// forward, append the accepted prefix plus one replacement on rejection, and
// repeat until the horizon is passed. Events after t_end are dropped.
SampleResult tpp_sd_sample(const Model& target, const Model& draft_model, double t_end,
                           const SdOptions& options, RngStream& rng,
                           std::span<const Event> history = {});

}  // namespace tppsd::sampler
