// Copyright 2026 The Simground Authors
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

#include "simground/transfer.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include <gtest/gtest.h>

#include "simground/rng.h"

namespace simground {
namespace {

const std::vector<TaskSpec>& BasketballTest() {
  static const auto* tasks = new std::vector<TaskSpec>(
      BuildSplit(Family::kBasketball, Split::kTest, Scale::kDesk));
  return *tasks;
}

EnvironmentSpec Ideal(LatentFactors latents) {
  EnvironmentSpec env;
  env.latents = latents;
  return env;
}

TEST(AuccessTest, WeightsAreLogDifferences) {
  EXPECT_DOUBLE_EQ(AuccessWeight(1), std::log(2.0));
  EXPECT_DOUBLE_EQ(AuccessWeight(99), std::log(100.0) - std::log(99.0));
  double sum = 0.0;
  for (int k = 1; k <= kAuccessAttempts; ++k) sum += AuccessWeight(k);
  EXPECT_NEAR(sum, std::log(101.0), 1e-12);
}

TEST(AuccessTest, AllSolvedFirstIsOneNoneIsZero) {
  EXPECT_DOUBLE_EQ(AuccessFromFirstSolves({1, 1, 1}).auccess, 1.0);
  EXPECT_DOUBLE_EQ(AuccessFromFirstSolves({0, 0}).auccess, 0.0);
  EXPECT_DOUBLE_EQ(AuccessFromFirstSolves({101}).auccess, 0.0);
  EXPECT_THROW(AuccessFromFirstSolves({}), std::invalid_argument);
}

TEST(AuccessTest, AllSolvedAtFiftyOneMatchesClosedForm) {
  const AuccessReport r = AuccessFromFirstSolves(std::vector<int>(20, 51));
  EXPECT_NEAR(r.auccess, std::log(101.0 / 51.0) / std::log(101.0), 1e-12);
  EXPECT_EQ(r.success[49], 0.0);
  EXPECT_EQ(r.success[50], 1.0);
}

TEST(AuccessTest, MixedFirstSolvesMatchDirectSum) {
  const std::vector<int> first{1, 3, 0, 100, 42};
  double num = 0.0;
  for (int k = 1; k <= 100; ++k) {
    int solved = 0;
    for (int a : first) solved += a != 0 && a <= k;
    num += (std::log(k + 1.0) - std::log(k)) * solved / 5.0;
  }
  EXPECT_NEAR(AuccessFromFirstSolves(first).auccess, num / std::log(101.0),
              1e-12);
}

TEST(AuccessTest, SuccessCurveIsMonotoneAndOrderInvariant) {
  Rng rng = Substream(3, "test");
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<int> first(1 + UniformIndex(rng, 30));
    for (int& v : first) v = UniformIndex(rng, 120);
    const AuccessReport r = AuccessFromFirstSolves(first);
    for (int k = 1; k < kAuccessAttempts; ++k) {
      EXPECT_LE(r.success[k - 1], r.success[k]);
    }
    std::vector<int> shuffled = first;
    std::reverse(shuffled.begin(), shuffled.end());
    EXPECT_NEAR(AuccessFromFirstSolves(shuffled).auccess, r.auccess, 1e-15);
    EXPECT_GE(r.auccess, 0.0);
    EXPECT_LE(r.auccess, 1.0);
  }
}

TEST(RankingTest, RankByScoreSortsDescendingWithIndexTies) {
  const double ninf = -std::numeric_limits<double>::infinity();
  const TaskRanking r = RankByScore(4, {0.5, 1.0, ninf, 0.5, -2.0});
  EXPECT_EQ(r.task_id, 4);
  EXPECT_EQ(r.order, (std::vector<int>{1, 0, 3, 4, 2}));
}

TEST(RankingTest, RandomOrderIsSeededPermutation) {
  const auto a = RandomOrderRanker(50, BasketballTest());
  const auto b = RandomOrderRanker(50, BasketballTest());
  const auto c = RandomOrderRanker(100, BasketballTest());
  ASSERT_EQ(a.tasks.size(), BasketballTest().size());
  for (std::size_t t = 0; t < a.tasks.size(); ++t) {
    EXPECT_EQ(a.tasks[t].order, b.tasks[t].order);
    EXPECT_NE(a.tasks[t].order, c.tasks[t].order);
    std::vector<int> sorted = a.tasks[t].order;
    std::sort(sorted.begin(), sorted.end());
    std::vector<int> iota(sorted.size());
    std::iota(iota.begin(), iota.end(), 0);
    EXPECT_EQ(sorted, iota);
  }
}

// 400 actions with 4 solutions: the first solution position of a uniform
// permutation has mean (400 + 1) / (4 + 1).
TEST(RankingTest, RandomOrderFirstSolveMatchesHypergeometricMean) {
  const std::vector<TaskSpec> one{BasketballTest()[0]};
  ASSERT_EQ(one[0].action_count(), 400);
  const std::vector<int> solutions{17, 123, 250, 399};
  double total = 0.0;
  const int orderings = 1000;
  for (int seed = 0; seed < orderings; ++seed) {
    const ActionRanker ranker = RandomOrderRanker(seed, one);
    const std::vector<int>& order = ranker.tasks[0].order;
    for (std::size_t k = 0; k < order.size(); ++k) {
      if (std::find(solutions.begin(), solutions.end(), order[k]) !=
          solutions.end()) {
        total += static_cast<double>(k + 1);
        break;
      }
    }
  }
  // Standard deviation of one draw is about 71; five standard errors.
  EXPECT_NEAR(total / orderings, 401.0 / 5.0, 5 * 71 / std::sqrt(orderings));
}

TEST(TransferTest, SimRankerInIdenticalEnvironmentIsOptimal) {
  const LatentFactors theta = kBasketballTrueLatents;
  const ActionRanker sim = TrainSimRanker(theta, BasketballTest());
  SuccessOracle real(Ideal(theta));
  const AuccessReport best = Auccess(sim, BasketballTest(), real);
  for (std::size_t t = 0; t < BasketballTest().size(); ++t) {
    const int first = best.first_solve[t];
    const TaskRanking& r = sim.tasks[t];
    const bool any = std::any_of(r.scores.begin(), r.scores.end(),
                                 [](double s) { return s == 1.0; });
    EXPECT_EQ(first, any ? 1 : first) << "task " << t;
  }
  for (std::uint64_t seed : {1, 2, 3}) {
    EXPECT_GE(best.auccess,
              Auccess(RandomOrderRanker(seed, BasketballTest()),
                      BasketballTest(), real)
                  .auccess);
  }
}

TEST(TransferTest, OracleCachesOutcomes) {
  SuccessOracle real(Ideal(kBasketballTrueLatents));
  const TaskSpec& t = BasketballTest()[1];
  const bool a = real.Solved(t, 17);
  EXPECT_EQ(real.rollouts(), 1);
  EXPECT_EQ(real.Solved(t, 17), a);
  EXPECT_EQ(real.rollouts(), 1);
  real.Precompute({t});
  EXPECT_EQ(real.rollouts(), t.action_count());
}

TEST(TransferTest, DomainRandomizationWithOneDrawIsSimRankerAtThatDraw) {
  const std::uint64_t seed = 77;
  Rng rng = Substream(seed, "domain-randomization");
  LatentFactors draw;
  draw.density = UniformReal(rng, 0.1, 20.0);
  draw.friction = UniformReal(rng, 0.0, 3.0);
  draw.restitution = UniformReal(rng, 0.0, 1.0);
  const auto dr = BaselineDomainRandomization(seed, BasketballTest(), 1);
  const auto sim = TrainSimRanker(draw, BasketballTest());
  for (std::size_t t = 0; t < dr.tasks.size(); ++t) {
    EXPECT_EQ(dr.tasks[t].order, sim.tasks[t].order);
  }
  const auto again = BaselineDomainRandomization(seed, BasketballTest(), 1);
  EXPECT_EQ(again.tasks[0].order, dr.tasks[0].order);
  EXPECT_THROW(BaselineDomainRandomization(seed, BasketballTest(), 0),
               std::invalid_argument);
}

TEST(TransferTest, DirectBaselineExtremes) {
  SuccessOracle real(Ideal(kBasketballTrueLatents));
  const AuccessReport r = BaselineDirect(real, BasketballTest(), 5);
  EXPECT_GE(r.auccess, 0.0);
  EXPECT_LE(r.auccess, 1.0);
  const AuccessReport again = BaselineDirect(real, BasketballTest(), 5);
  EXPECT_EQ(r.first_solve, again.first_solve);
}

TEST(TransferTest, InelasticBasketballSimulatorHasNoSolvingAction) {
  LatentFactors theta = kBasketballTrueLatents;
  theta.restitution = 0.0;
  const ActionRanker ranker = TrainSimRanker(theta, BasketballTest());
  for (const TaskRanking& r : ranker.tasks) {
    EXPECT_LT(*std::max_element(r.scores.begin(), r.scores.end()), 1.0)
        << "task " << r.task_id;
  }
}

PerformanceSurface Surface3x4() {
  PerformanceSurface s;
  s.friction = {0.1, 0.5, 1.0};
  s.restitution = {0.1, 0.4, 0.7, 0.9};
  s.j = {0.1, 0.5, 0.9, 0.2,  //
         0.1, 0.6, 0.8, 0.3,  //
         0.2, 0.5, 0.9, 0.2};
  return s;
}

TEST(SurfaceTest, InterpolationHitsNodesAndIsBilinear) {
  const PerformanceSurface s = Surface3x4();
  for (int i = 0; i < 3; ++i) {
    for (int k = 0; k < 4; ++k) {
      EXPECT_DOUBLE_EQ(s.Interpolate(s.friction[i], s.restitution[k]),
                       s.At(i, k));
    }
  }
  // Cell centre is the mean of its corners.
  EXPECT_NEAR(s.Interpolate(0.3, 0.25), (0.1 + 0.5 + 0.1 + 0.6) / 4, 1e-12);
  // Outside the hull clamps to the boundary.
  EXPECT_DOUBLE_EQ(s.Interpolate(5.0, 0.9), s.At(2, 3));
  EXPECT_FALSE(s.InHull(5.0, 0.9));
  EXPECT_TRUE(s.InHull(0.5, 0.5));
}

TEST(SurfaceTest, AxisVariancesMatchDefinition) {
  const PerformanceSurface s = Surface3x4();
  auto var = [](std::vector<double> v) {
    double m = 0.0;
    for (double x : v) m += x / v.size();
    double q = 0.0;
    for (double x : v) q += (x - m) * (x - m) / v.size();
    return q;
  };
  const double restitution_axis = (var({0.1, 0.5, 0.9, 0.2}) +
                                   var({0.1, 0.6, 0.8, 0.3}) +
                                   var({0.2, 0.5, 0.9, 0.2})) / 3;
  const double friction_axis = (var({0.1, 0.1, 0.2}) + var({0.5, 0.6, 0.5}) +
                                var({0.9, 0.8, 0.9}) + var({0.2, 0.3, 0.2})) /
                               4;
  EXPECT_NEAR(s.RestitutionAxisVariance(), restitution_axis, 1e-15);
  EXPECT_NEAR(s.FrictionAxisVariance(), friction_axis, 1e-15);
}

TEST(SurfaceTest, TextRoundTripAndValidation) {
  PerformanceSurface s = Surface3x4();
  s.proxy_damping = 0.7;
  s.density = 0.25;
  s.invalid_cells = {4};
  const PerformanceSurface back = ParseSurface(SurfaceToText(s));
  EXPECT_EQ(back.friction, s.friction);
  EXPECT_EQ(back.restitution, s.restitution);
  EXPECT_EQ(back.j, s.j);
  EXPECT_EQ(back.proxy_damping, 0.7);
  EXPECT_EQ(back.density, 0.25);
  EXPECT_EQ(back.invalid_cells, s.invalid_cells);
  EXPECT_THROW(ParseSurface("{}"), std::invalid_argument);
  EXPECT_THROW(ParseSurface("nope"), std::invalid_argument);
  PerformanceSurface bad = s;
  bad.j.pop_back();
  EXPECT_THROW(bad.Validate(), std::invalid_argument);
  bad = s;
  bad.j[0] = 1.5;
  EXPECT_THROW(bad.Validate(), std::invalid_argument);
}

TEST(SurfaceTest, CellsAreInUnitIntervalAndRebuildBitExactly) {
  SurfaceGrid grid;
  grid.friction_min = 0.2;
  grid.friction_max = 1.0;
  grid.friction_count = 2;
  grid.restitution_min = 0.3;
  grid.restitution_max = 0.9;
  grid.restitution_count = 3;
  EnvironmentSpec proxy = Ideal(kBasketballTrueLatents);
  proxy.damping = 0.7;
  const PerformanceSurface s =
      BuildPerformanceSurface(grid, proxy, BasketballTest(), 1.0);
  ASSERT_EQ(s.j.size(), 6u);
  for (double j : s.j) {
    EXPECT_GE(j, 0.0);
    EXPECT_LE(j, 1.0);
  }
  SurfaceGrid cell;
  cell.friction_min = cell.friction_max = 1.0;
  cell.friction_count = 1;
  cell.restitution_min = cell.restitution_max = 0.6;
  cell.restitution_count = 1;
  const PerformanceSurface one =
      BuildPerformanceSurface(cell, proxy, BasketballTest(), 1.0);
  EXPECT_EQ(one.j[0], s.At(1, 1));
}

TEST(SurfaceTest, RejectsDegenerateInputs) {
  SurfaceGrid grid;
  grid.friction_count = 0;
  EXPECT_THROW(grid.Validate(), std::invalid_argument);
  EXPECT_THROW(
      BuildPerformanceSurface(SurfaceGrid{}, EnvironmentSpec{}, {}, 1.0),
      std::invalid_argument);
}

TEST(SurfaceTest, DefaultGridAxes) {
  const SurfaceGrid g;
  const auto f = g.FrictionAxis();
  const auto e = g.RestitutionAxis();
  ASSERT_EQ(f.size(), 6u);
  ASSERT_EQ(e.size(), 6u);
  EXPECT_DOUBLE_EQ(f.front(), 0.1);
  EXPECT_DOUBLE_EQ(f.back(), 1.2);
  EXPECT_DOUBLE_EQ(e.front(), 0.1);
  EXPECT_DOUBLE_EQ(e.back(), 0.95);
}

}  // namespace
}  // namespace simground
