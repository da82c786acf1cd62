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

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "core/error.h"
#include "core/log.h"
#include "core/rng.h"
#include "model/checkpoint.h"
#include "model/mixture.h"
#include "model/model.h"
#include "sampler/sampler.h"
#include "support/oracles.h"

namespace tppsd::sampler {
namespace {

using model::Checkpoint;
using model::ModelConfig;
using tppsd::testing::random_checkpoint;

ModelConfig tiny_config(int k = 3) {
  ModelConfig c;
  c.dim = 8;
  c.num_components = 3;
  c.num_marks = k;
  c.num_heads = 2;
  c.num_layers = 1;
  return c;
}

// 1% critical value of the two-sample KS statistic for equal sizes n.
double ks_two_sample_critical(std::size_t n) {
  return 1.628 * std::sqrt(2.0 / static_cast<double>(n));
}

using tppsd::testing::two_sample_ks_distance;

class QuietWarnings : public ::testing::Test {
 protected:
  void SetUp() override {
    set_warning_sink([this](std::string_view) { ++warnings; });
  }
  void TearDown() override { set_warning_sink(default_warning_sink()); }
  int warnings = 0;
};

// ---- acceptance bookkeeping ----

PositionRecord record(double interval_ratio, double mark_ratio, double eps_i, double eps_m) {
  PositionRecord r;
  r.interval_ratio = interval_ratio;
  r.mark_ratio = mark_ratio;
  r.eps_interval = eps_i;
  r.eps_mark = eps_m;
  return r;
}

TEST(Acceptance, RejectedFirstIntervalGivesZero) {
  std::vector<PositionRecord> recs{record(0.5, 1.0, 0.7, 0.1), record(2.0, 2.0, 0.1, 0.1)};
  EXPECT_EQ(apply_acceptance(recs), 0u);
  EXPECT_FALSE(recs[0].interval_accepted);
  EXPECT_FALSE(recs[1].interval_accepted);
  EXPECT_TRUE(recs[1].interval_passed);
}

TEST(Acceptance, MinimumRuleAcrossIntervalAndMark) {
  std::vector<PositionRecord> recs{record(1.0, 1.0, 0.1, 0.1), record(1.0, 1.0, 0.2, 0.2),
                                   record(0.3, 1.0, 0.9, 0.1), record(1.0, 0.1, 0.1, 0.9),
                                   record(1.0, 1.0, 0.1, 0.1)};
  EXPECT_EQ(apply_acceptance(recs), 2u);
  EXPECT_TRUE(recs[1].mark_accepted);
  EXPECT_FALSE(recs[2].interval_accepted);
  EXPECT_FALSE(recs[3].interval_accepted);
}

TEST(Acceptance, MarkRejectionAloneStopsAtThatPosition) {
  std::vector<PositionRecord> recs{record(1.0, 1.0, 0.1, 0.1), record(1.2, 0.4, 0.5, 0.5)};
  EXPECT_EQ(apply_acceptance(recs), 1u);
  EXPECT_TRUE(recs[1].interval_accepted);
  EXPECT_FALSE(recs[1].mark_accepted);
}

TEST(Acceptance, RatioAtLeastOneAlwaysPasses) {
  std::vector<PositionRecord> recs{record(1.0, 1.0, 0.9999999999, 0.9999999999)};
  EXPECT_EQ(apply_acceptance(recs), 1u);
  std::vector<PositionRecord> tie{record(0.5, 1.0, 0.5, 0.0)};
  EXPECT_EQ(apply_acceptance(tie), 0u);
}

// ---- residual marks ----

TEST(ResidualMark, TwoMarks) {
  const model::MarkDistribution t{{0.8, 0.2}}, d{{0.5, 0.5}};
  const auto r = residual_mark_distribution(t, d);
  EXPECT_DOUBLE_EQ(r[0], 1.0);
  EXPECT_DOUBLE_EQ(r[1], 0.0);
  RngStream rng(1, 0);
  for (int i = 0; i < 100; ++i) EXPECT_EQ(residual_mark_sample(t, d, rng), 0);
}

TEST(ResidualMark, ThreeMarks) {
  const auto r = residual_mark_distribution({{0.5, 0.3, 0.2}}, {{0.2, 0.5, 0.3}});
  EXPECT_NEAR(r[0], 1.0, 1e-15);
  EXPECT_EQ(r[1], 0.0);
  EXPECT_EQ(r[2], 0.0);
}

TEST(ResidualMark, EqualDistributionsHaveNoMass) {
  try {
    residual_mark_distribution({{0.4, 0.6}}, {{0.4, 0.6}});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kNumeric);
  }
}

TEST(ResidualMark, ExactEnumerationRecoversTarget) {
  std::mt19937_64 gen(2);
  for (int trial = 0; trial < 200; ++trial) {
    const int k = 2 + trial % 3;
    const model::MarkDistribution t{tppsd::testing::random_simplex(gen, k)};
    const model::MarkDistribution d{tppsd::testing::random_simplex(gen, k, 1e-3)};
    // Test-side residual: normalised positive part of f_T - f_D.
    std::vector<double> pos(k);
    double z = 0.0;
    for (int j = 0; j < k; ++j) z += pos[j] = std::max(0.0, t.probs[j] - d.probs[j]);
    const auto r = residual_mark_distribution(t, d);
    double reject = 0.0;
    for (int j = 0; j < k; ++j) {
      EXPECT_NEAR(r[j], pos[j] / z, 1e-12);
      reject += d.probs[j] * (1.0 - std::min(1.0, t.probs[j] / d.probs[j]));
    }
    for (int j = 0; j < k; ++j) {
      const double law = d.probs[j] * std::min(1.0, t.probs[j] / d.probs[j]) + reject * r[j];
      EXPECT_NEAR(law, t.probs[j], 1e-12) << trial;
    }
  }
}

// ---- residual intervals ----

TEST_F(QuietWarnings, ResidualMatchesQuadratureOracle) {
  const auto t = model::MixtureParams::single(0.0, 0.5);
  const auto d = model::MixtureParams::single(1.0, 0.5);
  const tppsd::testing::ResidualCdf oracle(t, d);
  RngStream rng(3, 0);
  std::vector<double> xs(10000);
  for (double& x : xs) {
    const ResidualDraw r = residual_interval_sample(t, d, rng);
    ASSERT_FALSE(r.fell_back);
    x = r.tau;
  }
  EXPECT_LT(tppsd::testing::ks_distance(xs, oracle), 0.02);
  EXPECT_EQ(warnings, 0);
}

TEST_F(QuietWarnings, ResidualOnRandomMixtures) {
  std::mt19937_64 gen(4);
  for (int trial = 0; trial < 5; ++trial) {
    const auto t = tppsd::testing::random_mixture(gen, 3);
    const auto d = tppsd::testing::random_mixture(gen, 2);
    const tppsd::testing::ResidualCdf oracle(t, d);
    RngStream rng(5, trial);
    std::vector<double> xs(5000);
    for (double& x : xs) x = residual_interval_sample(t, d, rng).tau;
    EXPECT_LT(tppsd::testing::ks_distance(xs, oracle), 1.63 / std::sqrt(5000.0)) << trial;
  }
}

TEST_F(QuietWarnings, DisjointSupportReducesToTarget) {
  const auto t = model::MixtureParams::single(0.0, 0.1);
  const auto d = model::MixtureParams::single(50.0, 0.1);
  RngStream rng(6, 0);
  std::vector<double> xs(10000);
  for (double& x : xs) {
    const ResidualDraw r = residual_interval_sample(t, d, rng);
    ASSERT_EQ(r.proposals, 1u);
    x = r.tau;
  }
  const auto cdf = [&](double tau) { return tppsd::testing::lognormal_mixture_cdf(tau, t); };
  EXPECT_LT(tppsd::testing::ks_distance(xs, cdf), 1.63 / std::sqrt(10000.0));
}

TEST_F(QuietWarnings, IdenticalMixturesFallBackWithWarning) {
  const auto t = model::MixtureParams::single(0.2, 0.7);
  RngStream rng(7, 0);
  const ResidualDraw r = residual_interval_sample(t, t, rng, 50);
  EXPECT_TRUE(r.fell_back);
  EXPECT_EQ(r.proposals, 50u);
  EXPECT_GT(r.tau, 0.0);
  EXPECT_EQ(warnings, 1);
}

// ---- drafting and verification ----

TEST(Draft, RecordsConsistentDensities) {
  const model::Model dm(random_checkpoint(tiny_config(), 8));
  const std::vector<Event> history{{0.4, 1}, {1.1, 0}};
  RngStream rng(9, 0);
  SampleRunStats stats;
  const DraftBatch b = draft(dm, history, 6, rng, &stats);
  ASSERT_EQ(b.size(), 6u);
  EXPECT_EQ(stats.draft_forwards, 6u);
  std::vector<Event> events = history;
  double prev = history.back().time;
  for (std::size_t l = 0; l < b.size(); ++l) {
    EXPECT_GT(b.events[l].time, prev);
    EXPECT_NEAR(b.events[l].time - prev, b.intervals[l], 1e-12);
    prev = b.events[l].time;
    const auto dist = dm.next_event(events);
    EXPECT_NEAR(b.interval_log_density[l], model::mixture_logpdf(b.intervals[l], dist.interval),
                1e-12);
    for (std::size_t k = 0; k < dist.mark.size(); ++k) {
      EXPECT_NEAR(b.mark_dists[l].probs[k], dist.mark.probs[k], 1e-12);
    }
    events.push_back(b.events[l]);
  }
}

TEST(Draft, SingleCandidate) {
  const model::Model dm(random_checkpoint(tiny_config(), 10));
  RngStream rng(11, 0);
  SampleRunStats stats;
  EXPECT_EQ(draft(dm, {}, 1, rng, &stats).size(), 1u);
  EXPECT_EQ(stats.draft_forwards, 1u);
  EXPECT_THROW(draft(dm, {}, 0, rng), Error);
}

TEST(Verify, IdenticalModelsAcceptEverything) {
  const Checkpoint ckpt = random_checkpoint(tiny_config(), 12);
  const model::Model m(ckpt);
  RngStream rng(13, 0);
  for (int trial = 0; trial < 50; ++trial) {
    const DraftBatch b = draft(m, {}, 8, rng);
    SampleRunStats stats;
    const VerificationOutcome v = verify(m, {}, b, rng, &stats);
    EXPECT_EQ(v.accepted_length, 8u);
    EXPECT_FALSE(v.replacement_pending());
    EXPECT_EQ(stats.target_forwards, 1u);
    for (const auto& r : v.positions) {
      EXPECT_NEAR(r.interval_ratio, 1.0, 1e-12);
      EXPECT_NEAR(r.mark_ratio, 1.0, 1e-12);
    }
  }
}

TEST(Verify, BatchedTargetMatchesPerPrefix) {
  const model::Model target(random_checkpoint(tiny_config(), 14));
  const model::Model dm(random_checkpoint(tiny_config(), 15));
  const std::vector<Event> history{{0.3, 2}};
  RngStream rng(16, 0);
  const DraftBatch b = draft(dm, history, 5, rng);
  const VerificationOutcome v = verify(target, history, b, rng);
  std::vector<Event> events = history;
  for (std::size_t l = 0; l < b.size(); ++l) {
    const auto single = target.next_event(events);
    const double ratio = std::exp(model::mixture_logpdf(b.intervals[l], single.interval) -
                                  b.interval_log_density[l]);
    EXPECT_NEAR(v.positions[l].interval_ratio, ratio, 1e-12 * std::max(1.0, ratio));
    const int k = b.events[l].mark;
    EXPECT_NEAR(v.positions[l].mark_ratio, single.mark.probs[k] / b.mark_dists[l].probs[k],
                1e-12);
    events.push_back(b.events[l]);
  }
}

TEST(Verify, IntervalAcceptanceRateMatchesOverlap) {
  const model::Model target(random_checkpoint(tiny_config(), 17));
  const model::Model dm(random_checkpoint(tiny_config(), 18));
  const auto gt = target.next_event({}).interval;
  const auto gd = dm.next_event({}).interval;
  const double beta = tppsd::testing::ResidualCdf(gt, gd).overlap();
  ASSERT_GT(beta, 0.05);
  ASSERT_LT(beta, 0.95);
  RngStream rng(19, 0);
  const int n = 10000;
  int passed = 0;
  for (int i = 0; i < n; ++i) {
    const DraftBatch b = draft(dm, {}, 1, rng);
    passed += verify(target, {}, b, rng).positions[0].interval_passed ? 1 : 0;
  }
  const double sigma = std::sqrt(beta * (1.0 - beta) / n);
  EXPECT_NEAR(static_cast<double>(passed) / n, beta, 3.0 * sigma);
}

// ---- full steps ----

struct StepCase {
  std::uint64_t seed;
  int gamma;
  RejectionPolicy policy;
};

class SdStepLaw : public ::testing::TestWithParam<StepCase> {};

TEST_P(SdStepLaw, NextEventMatchesAutoregressive) {
  const StepCase sc = GetParam();
  set_warning_sink(nullptr);
  const model::Model target(random_checkpoint(tiny_config(), 100 + sc.seed));
  const model::Model dm(random_checkpoint(tiny_config(), 200 + sc.seed));
  const std::vector<Event> history{{0.5, 0}, {0.9, 2}};
  const SdOptions opts{sc.gamma, sc.policy};
  const int n = 2000;
  std::vector<double> sd_times, ar_times;
  std::vector<int> sd_marks(3, 0);
  for (int r = 0; r < n; ++r) {
    RngStream base(sc.seed, r);
    SdStreams streams(base);
    SampleRunStats stats;
    const SdStep step = sd_step(target, dm, history, opts, streams, stats);
    ASSERT_FALSE(step.appended.empty());
    sd_times.push_back(step.appended[0].time);
    ++sd_marks[step.appended[0].mark];
    RngStream ar(sc.seed + 1000, r);
    ar_times.push_back(ar_next_event(target, history, ar).time);
  }
  set_warning_sink(default_warning_sink());
  const double d = two_sample_ks_distance(sd_times, ar_times);
  EXPECT_LT(d, ks_two_sample_critical(n));
  EXPECT_GT(tppsd::testing::two_sample_ks_pvalue(d, n, n), 0.01);
  const auto f = target.next_event(history).mark;
  for (int k = 0; k < 3; ++k) {
    const double sigma = std::sqrt(f.probs[k] * (1.0 - f.probs[k]) / n);
    EXPECT_NEAR(static_cast<double>(sd_marks[k]) / n, f.probs[k], 4.0 * sigma) << k;
  }
}

INSTANTIATE_TEST_SUITE_P(Seeds, SdStepLaw,
                         ::testing::Values(StepCase{1, 4, RejectionPolicy::kPositionwise},
                                           StepCase{2, 4, RejectionPolicy::kPositionwise},
                                           StepCase{3, 4, RejectionPolicy::kPositionwise},
                                           StepCase{4, 1, RejectionPolicy::kPositionwise}));

TEST(SdStep, LiteralPolicyDistortsIntervals) {
  set_warning_sink(nullptr);
  // Marks disagree strongly while intervals agree, so mark rejections are
  // common and the literal policy discards accepted intervals.
  ModelConfig c = tiny_config();
  c.num_layers = 1;
  Checkpoint t = random_checkpoint(c, 40);
  Checkpoint d = t;
  d.at(model::param::kMarkOutBias)(0, 0) += 3.0;
  d.at(model::param::kMeanBias).fill(0.4);
  t.at(model::param::kMeanBias).fill(0.0);
  const model::Model target(t), dm(d);
  const int n = 4000;
  std::vector<double> literal, positionwise, ar;
  for (int r = 0; r < n; ++r) {
    for (auto [policy, out] : {std::pair{RejectionPolicy::kAlg1Literal, &literal},
                               std::pair{RejectionPolicy::kPositionwise, &positionwise}}) {
      RngStream base(41, r);
      SdStreams streams(base);
      SampleRunStats stats;
      out->push_back(sd_step(target, dm, {}, {1, policy}, streams, stats).appended[0].time);
    }
    RngStream a(42, r);
    ar.push_back(ar_next_event(target, {}, a).time);
  }
  set_warning_sink(default_warning_sink());
  const double crit = ks_two_sample_critical(n);
  EXPECT_LT(two_sample_ks_distance(positionwise, ar), crit);
  EXPECT_GT(two_sample_ks_distance(literal, ar), crit);
}

TEST(SdStep, AppendedCountFollowsAcceptedLength) {
  set_warning_sink(nullptr);
  const model::Model target(random_checkpoint(tiny_config(), 20));
  const model::Model dm(random_checkpoint(tiny_config(), 21));
  for (RejectionPolicy policy : {RejectionPolicy::kPositionwise, RejectionPolicy::kAlg1Literal}) {
    RngStream base(22, static_cast<int>(policy));
    SdStreams streams(base);
    SampleRunStats stats;
    std::vector<Event> history;
    int full = 0, partial = 0;
    for (int it = 0; it < 300; ++it) {
      const SdStep step = sd_step(target, dm, history, {5, policy}, streams, stats);
      if (step.accepted == 5) {
        ++full;
        EXPECT_EQ(step.appended.size(), 5u);
      } else {
        ++partial;
        EXPECT_EQ(step.appended.size(), step.accepted + 1);
      }
      EXPECT_EQ(stats.target_forwards, static_cast<std::size_t>(it + 1));
      history.insert(history.end(), step.appended.begin(), step.appended.end());
      if (history.size() > 60) history.clear();
    }
    EXPECT_GT(partial, 0);
    EXPECT_EQ(stats.events_drafted, 1500u);
    EXPECT_LE(stats.events_accepted, stats.events_drafted);
    (void)full;
  }
  set_warning_sink(default_warning_sink());
}

TEST(TppSd, IdenticalModelsAcceptEverythingAndMatchAr) {
  const model::Model m(random_checkpoint(tiny_config(), 23));
  const int n = 2000;
  std::vector<double> sd_first, ar_first;
  for (int r = 0; r < n; ++r) {
    RngStream a(24, r), b(25, r);
    const SampleResult sd = tpp_sd_sample(m, m, 3.0, {4, RejectionPolicy::kPositionwise}, a);
    EXPECT_EQ(sd.stats.events_accepted, sd.stats.events_drafted);
    EXPECT_EQ(sd.stats.acceptance_rate(), 1.0);
    const SampleResult ar = ar_sample(m, 3.0, b);
    if (!sd.sequence.events.empty()) sd_first.push_back(sd.sequence.events[0].time);
    if (!ar.sequence.events.empty()) ar_first.push_back(ar.sequence.events[0].time);
  }
  ASSERT_GT(sd_first.size(), 100u);
  const double crit = 1.628 * std::sqrt(1.0 / sd_first.size() + 1.0 / ar_first.size());
  EXPECT_LT(two_sample_ks_distance(sd_first, ar_first), crit);
}

TEST(TppSd, OutputIsValidDeterministicAndInsideHorizon) {
  set_warning_sink(nullptr);
  const model::Model target(random_checkpoint(tiny_config(), 26));
  const model::Model dm(random_checkpoint(tiny_config(), 27));
  const std::vector<Event> history{{0.2, 1}};
  RngStream a(28, 0), b(28, 0);
  const SampleResult x = tpp_sd_sample(target, dm, 15.0, {6, RejectionPolicy::kPositionwise}, a,
                                       history);
  const SampleResult y = tpp_sd_sample(target, dm, 15.0, {6, RejectionPolicy::kPositionwise}, b,
                                       history);
  set_warning_sink(default_warning_sink());
  EXPECT_EQ(x.sequence, y.sequence);
  EXPECT_EQ(x.stats.events_drafted, y.stats.events_drafted);
  EXPECT_EQ(x.stats.events_accepted, y.stats.events_accepted);
  EXPECT_NO_THROW(require_valid(x.sequence, 3));
  EXPECT_EQ(x.sequence.t_end, 15.0);
  EXPECT_EQ(x.sequence.events.front(), history.front());
  EXPECT_EQ(x.stats.target_forwards, x.stats.iterations);
}

TEST(ArSample, ShortHorizonAndDeterminism) {
  const model::Model m(random_checkpoint(tiny_config(), 29));
  RngStream a(30, 0), b(30, 0), c(30, 0);
  const SampleResult tiny = ar_sample(m, 1e-12, a);
  EXPECT_TRUE(tiny.sequence.events.empty());
  const SampleResult x = ar_sample(m, 20.0, b);
  const SampleResult y = ar_sample(m, 20.0, c);
  EXPECT_EQ(x.sequence, y.sequence);
  EXPECT_NO_THROW(require_valid(x.sequence, 3));
  EXPECT_EQ(x.stats.target_forwards, x.sequence.events.size() + 1);
}

}  // namespace
}  // namespace tppsd::sampler
