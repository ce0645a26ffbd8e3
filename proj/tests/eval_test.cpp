/*
 * Copyright 2026 The TaskProbe Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *      http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "taskprobe/eval.hpp"

#include <algorithm>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "taskprobe/tracing.hpp"

namespace taskprobe {
namespace {

ScoredPopulation population(std::vector<double> in, std::vector<double> out,
                            Orientation o = Orientation::kHigherIsIn) {
  ScoredPopulation pop;
  pop.in_scores = std::move(in);
  pop.out_scores = std::move(out);
  pop.orientation = o;
  return pop;
}

ScoredPopulation gaussian_population(std::size_t n, double shift, std::uint64_t seed) {
  SeededRng rng(seed);
  ScoredPopulation pop;
  for (std::size_t i = 0; i < n; ++i) {
    pop.in_scores.push_back(rng.normal() + shift);
    pop.out_scores.push_back(rng.normal());
  }
  return pop;
}

TEST(OrientationTest, Parse) {
  EXPECT_EQ(parse_orientation("higher-is-in"), Orientation::kHigherIsIn);
  EXPECT_EQ(parse_orientation(to_string(Orientation::kLowerIsIn)), Orientation::kLowerIsIn);
  EXPECT_THROW(parse_orientation("up"), Error);
}

TEST(RocTest, PerfectSeparation) {
  const RocResult r = roc(population({5, 6, 7}, {1, 2}));
  EXPECT_EQ(r.auc, 1.0);
  EXPECT_FALSE(r.below_chance());
  EXPECT_EQ(tpr_at_fpr(r, 0.0), 1.0);
  const RocResult flipped = roc(population({5, 6, 7}, {1, 2}, Orientation::kLowerIsIn));
  EXPECT_EQ(flipped.auc, 0.0);
  EXPECT_TRUE(flipped.below_chance());
}

TEST(RocTest, SameDistributionIsNearChance) {
  const auto pop = gaussian_population(10000, 0.0, 1);
  // Null standard deviation of the AUC: sqrt((n1 + n2 + 1) / (12 n1 n2)).
  const double sd = std::sqrt(20001.0 / (12.0 * 1e8));
  EXPECT_LT(std::abs(roc(pop).auc - 0.5), 3 * sd);
}

TEST(RocTest, MatchesMannWhitneyWithTies) {
  SeededRng rng(2);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t n_in = 1 + rng.below(200), n_out = 1 + rng.below(200);
    std::vector<double> in, out;
    // Coarse integer scores force many ties.
    for (std::size_t i = 0; i < n_in; ++i) in.push_back(static_cast<double>(rng.below(12)) + 1);
    for (std::size_t i = 0; i < n_out; ++i) out.push_back(static_cast<double>(rng.below(10)));
    for (Orientation o : {Orientation::kHigherIsIn, Orientation::kLowerIsIn}) {
      const double expected = o == Orientation::kHigherIsIn ? oracle::mann_whitney_auc(in, out)
                                                            : oracle::mann_whitney_auc(out, in);
      EXPECT_NEAR(roc(population(in, out, o)).auc, expected, 1e-12);
    }
  }
}

TEST(RocTest, PointsAreMonotoneFromOriginToCorner) {
  const auto pop = gaussian_population(300, 0.5, 3);
  const RocResult r = roc(pop);
  ASSERT_GE(r.points.size(), 2u);
  EXPECT_EQ(r.points.front().fpr, 0.0);
  EXPECT_EQ(r.points.front().tpr, 0.0);
  EXPECT_EQ(r.points.back().fpr, 1.0);
  EXPECT_EQ(r.points.back().tpr, 1.0);
  for (std::size_t i = 1; i < r.points.size(); ++i) {
    EXPECT_GE(r.points[i].fpr, r.points[i - 1].fpr);
    EXPECT_GE(r.points[i].tpr, r.points[i - 1].tpr);
  }
}

TEST(RocTest, OrientationDualityAndMonotoneInvariance) {
  auto pop = gaussian_population(500, 0.3, 4);
  const double auc = roc(pop).auc;
  ScoredPopulation negated = pop;
  negated.orientation = Orientation::kLowerIsIn;
  EXPECT_NEAR(roc(negated).auc, 1.0 - auc, 1e-12);

  ScoredPopulation transformed = pop;
  for (auto* v : {&transformed.in_scores, &transformed.out_scores})
    for (double& s : *v) s = std::exp(3.0 * s) + 2.0;
  EXPECT_EQ(roc(transformed).auc, auc);

  ScoredPopulation reordered = pop;
  std::reverse(reordered.in_scores.begin(), reordered.in_scores.end());
  std::rotate(reordered.out_scores.begin(), reordered.out_scores.begin() + 17, reordered.out_scores.end());
  EXPECT_EQ(roc(reordered).auc, auc);
}

TEST(RocTest, Errors) {
  EXPECT_THROW(roc(population({}, {1.0})), Error);
  EXPECT_THROW(roc(population({1.0}, {})), Error);
  EXPECT_THROW(roc(population({std::nan("")}, {1.0})), Error);
}

TEST(TprAtFprTest, StepConvention) {
  // Oriented order: 9(in) 8(out) 7(in) 6(in) 5(out) 4(out).
  const RocResult r = roc(population({9, 7, 6}, {8, 5, 4}));
  EXPECT_NEAR(tpr_at_fpr(r, 0.0), 1.0 / 3, 1e-15);
  EXPECT_NEAR(tpr_at_fpr(r, 0.3), 1.0 / 3, 1e-15);
  EXPECT_NEAR(tpr_at_fpr(r, 1.0 / 3), 1.0, 1e-15);
  EXPECT_EQ(tpr_at_fpr(r, 1.0), 1.0);
  EXPECT_THROW(tpr_at_fpr(r, 1.5), Error);
  EXPECT_NEAR(r.auc, oracle::mann_whitney_auc({9, 7, 6}, {8, 5, 4}), 1e-15);
}

TEST(PercentileTest, BalancedPoolIdentity) {
  for (std::uint64_t seed : {5u, 6u}) {
    for (std::size_t n : {1000u, 1001u, 2500u}) {
      const auto pop = gaussian_population(n, seed == 5 ? 0.8 : 0.0, seed);
      const std::vector<double> ps{50, 75, 90, 33.3};
      const auto points = percentile_operating_points(pop, ps);
      ASSERT_EQ(points.size(), ps.size());
      for (const auto& op : points) {
        EXPECT_NEAR(op.tpr + op.fpr, 2 * (1 - op.percentile / 100), 2.0 / (2.0 * n))
            << "p=" << op.percentile << " n=" << n;
        EXPECT_DOUBLE_EQ(op.balanced_accuracy, (op.tpr + 1 - op.fpr) / 2);
      }
    }
  }
}

TEST(PercentileTest, LowerIsInMirrorsThreshold) {
  auto pop = gaussian_population(1000, 1.0, 7);
  const std::vector<double> ps{75};
  const auto higher = percentile_operating_points(pop, ps)[0];
  for (auto* v : {&pop.in_scores, &pop.out_scores})
    for (double& s : *v) s = -s;
  pop.orientation = Orientation::kLowerIsIn;
  const auto lower = percentile_operating_points(pop, ps)[0];
  EXPECT_EQ(lower.threshold, -higher.threshold);
  EXPECT_EQ(lower.tpr, higher.tpr);
  EXPECT_EQ(lower.fpr, higher.fpr);
}

TEST(PercentileTest, ThresholdIsNearestRank) {
  const auto pop = population({1, 2, 3, 4, 5}, {6, 7, 8, 9, 10});
  const std::vector<double> ps{50, 90, 10};
  const auto points = percentile_operating_points(pop, ps);
  EXPECT_EQ(points[0].threshold, 5.0);
  EXPECT_EQ(points[0].tpr, 0.0);
  EXPECT_EQ(points[0].fpr, 1.0);
  EXPECT_EQ(points[1].threshold, 9.0);
  EXPECT_EQ(points[2].threshold, 1.0);
  EXPECT_EQ(points[2].tpr, 0.8);
}

TEST(PercentileTest, AllEqualScoresCallNothingIn) {
  const auto pop = population(std::vector<double>(10, 2.0), std::vector<double>(10, 2.0));
  const std::vector<double> ps{50};
  const auto op = percentile_operating_points(pop, ps)[0];
  EXPECT_EQ(op.tpr, 0.0);
  EXPECT_EQ(op.fpr, 0.0);
  EXPECT_EQ(op.balanced_accuracy, 0.5);
  EXPECT_EQ(roc(pop).auc, 0.5);
}

TEST(PercentileTest, Errors) {
  const auto pop = population({1}, {2});
  const std::vector<double> bad{100};
  EXPECT_THROW(percentile_operating_points(pop, bad), Error);
  const std::vector<double> ok{50};
  EXPECT_THROW(percentile_operating_points(population({}, {1}), ok), Error);
}

TEST(SummarizeTest, Examples) {
  const std::vector<double> v{1, 2, 3, 4};
  const MomentSummary m = summarize(v);
  EXPECT_EQ(m.count, 4u);
  EXPECT_DOUBLE_EQ(m.mean, 2.5);
  EXPECT_DOUBLE_EQ(m.variance, 5.0 / 3);
  EXPECT_DOUBLE_EQ(m.standard_error, std::sqrt(5.0 / 12));
  EXPECT_EQ(summarize(std::vector<double>{}).count, 0u);
  EXPECT_EQ(summarize(std::vector<double>{7}).variance, 0.0);
}

TEST(SecurityGameTest, ZeroTrials) {
  const auto pop = run_security_game([](Membership, SeededRng&) { return 0.0; }, 0, SeededRng(1));
  EXPECT_EQ(pop.size(), 0u);
}

TEST(SecurityGameTest, ConstantSourceIsChance) {
  const auto pop = run_security_game([](Membership, SeededRng&) { return 1.0; }, 1000, SeededRng(2));
  EXPECT_EQ(roc(pop).auc, 0.5);
}

TEST(SecurityGameTest, CoinIsFair) {
  const auto pop = run_security_game([](Membership m, SeededRng&) { return m == Membership::kIn ? 1.0 : 0.0; },
                                     20000, SeededRng(3));
  EXPECT_NEAR(static_cast<double>(pop.in_scores.size()) / 20000, 0.5, 3 * std::sqrt(0.25 / 20000));
  EXPECT_EQ(roc(pop).auc, 1.0);
}

TEST(SecurityGameTest, MatchesTracingExperiment) {
  TracingConfig cfg;
  cfg.tasks = 16;
  cfg.dim = 8;
  cfg.samples_per_task = 4;
  cfg.challenge_size = 2;
  const SeededRng seed(4);
  const auto outcomes = run_tracing_experiment(cfg, 400, seed);
  const auto pop = run_security_game(
      [&](Membership m, SeededRng& r) {
        return tracing_round(cfg, m, TracingSampler::kSufficientStatistic, r);
      },
      400, seed, Orientation::kHigherIsIn, 3);
  std::vector<double> in, out;
  for (const auto& o : outcomes) (o.label == Membership::kIn ? in : out).push_back(o.statistic);
  EXPECT_EQ(pop.in_scores, in);
  EXPECT_EQ(pop.out_scores, out);
}

}  // namespace
}  // namespace taskprobe
