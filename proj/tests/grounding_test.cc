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

#include "simground/grounding.h"

#include <cmath>
#include <limits>
#include <mutex>
#include <stdexcept>
#include <vector>

#include <gtest/gtest.h>

namespace simground {
namespace {

Trajectory Track(std::vector<std::vector<Vec2>> frames) {
  Trajectory t;
  t.roles = {"ball-a", "ball-b"};
  t.dynamic_bodies = {0, 1};
  int step = 0;
  for (const auto& positions : frames) {
    Frame f;
    f.step = step++;
    for (Vec2 p : positions) f.states.push_back(BodyState{p, {}, 0.0, 0.0});
    t.frames.push_back(f);
  }
  return t;
}

TEST(GroundingTest, ResidualIsMeanSummedSquaredPositionError) {
  const Trajectory real = Track({{{0, 0}, {1, 1}}, {{0, 1}, {2, 2}}});
  const Trajectory sim = Track({{{3, 4}, {1, 1}}, {{0, 1}, {2, 0}}});
  // Frame 0: 25 + 0. Frame 1: 0 + 4. Mean over two frames.
  EXPECT_DOUBLE_EQ(TrajectoryResidual(real, sim), 14.5);
  EXPECT_DOUBLE_EQ(TrajectoryResidual(real, real), 0.0);
}

TEST(GroundingTest, ResidualUsesSharedFramePrefix) {
  const Trajectory real = Track({{{0, 0}, {0, 0}}, {{0, 0}, {0, 0}}});
  const Trajectory sim = Track({{{1, 0}, {0, 0}}});
  EXPECT_DOUBLE_EQ(TrajectoryResidual(real, sim), 1.0);
}

TEST(GroundingTest, ResidualRejectsIncomparableTrajectories) {
  const Trajectory two = Track({{{0, 0}, {0, 0}}});
  Trajectory empty = two;
  empty.frames.clear();
  EXPECT_THROW(TrajectoryResidual(two, empty), InvalidComparison);
  Trajectory one = two;
  one.dynamic_bodies = {0};
  EXPECT_THROW(TrajectoryResidual(two, one), InvalidComparison);
}

TEST(GroundingTest, ResidualOfTrueLatentsInSameEnvironmentIsZero) {
  const auto tasks = BuildSplit(Family::kBasketball, Split::kTrain, Scale::kDesk);
  EnvironmentSpec env;
  env.latents = kBasketballTrueLatents;
  RealDataset data;
  for (int i = 0; i < 4; ++i) {
    data.samples.push_back(
        CollectSample(tasks[i], DecodeAction(tasks[i], 37 * i + 5), env));
  }
  EXPECT_EQ(Residual(kBasketballTrueLatents, data, EnvironmentSpec{}), 0.0);
  EXPECT_GT(Residual({1.0, 0.2, 0.2}, data, EnvironmentSpec{}), 0.0);
  EXPECT_THROW(Residual(kBasketballTrueLatents, RealDataset{}, EnvironmentSpec{}),
               std::invalid_argument);
}

CemConfig SmallCem() {
  CemConfig c;
  c.rounds = 8;
  c.samples_per_round = 200;
  c.elite_count = 20;
  return c;
}

TEST(GroundingTest, CemFindsQuadraticMinimum) {
  const LatentVector target{3.0, 0.8, 0.3};
  const Objective f = [&](const LatentFactors& t) {
    const LatentVector v = ToVector(t);
    double s = 0.0;
    for (int d = 0; d < 3; ++d) s += (v[d] - target[d]) * (v[d] - target[d]);
    return s;
  };
  CemConfig c = SmallCem();
  c.mean = {2.0, 1.0, 0.5};
  c.stddev = {1.0, 0.5, 0.25};
  const CemResult r = MinimizeCem(f, c, 50);
  EXPECT_NEAR(r.theta.density, 3.0, 0.02);
  EXPECT_NEAR(r.theta.friction, 0.8, 0.02);
  EXPECT_NEAR(r.theta.restitution, 0.3, 0.02);
  EXPECT_EQ(r.evaluations, 8 * 200);
  EXPECT_EQ(r.residual, f(r.theta));
}

TEST(GroundingTest, CemIsDeterministicPerSeed) {
  const Objective f = [](const LatentFactors& t) {
    return std::abs(t.friction - 0.4) + std::abs(t.restitution - 0.6);
  };
  const CemResult a = MinimizeCem(f, SmallCem(), 100);
  const CemResult b = MinimizeCem(f, SmallCem(), 100);
  const CemResult c = MinimizeCem(f, SmallCem(), 150);
  EXPECT_EQ(a.theta, b.theta);
  EXPECT_EQ(a.residual, b.residual);
  EXPECT_NE(a.theta, c.theta);
}

TEST(GroundingTest, CemSamplesStayInsideBounds) {
  CemConfig c = SmallCem();
  c.stddev = {30.0, 10.0, 5.0};
  std::mutex mu;
  std::vector<LatentVector> seen;
  const Objective f = [&](const LatentFactors& t) {
    std::lock_guard<std::mutex> lock(mu);
    seen.push_back(ToVector(t));
    return t.density;
  };
  const CemResult r = MinimizeCem(f, c, 1);
  for (const LatentVector& v : seen) {
    for (int d = 0; d < 3; ++d) {
      EXPECT_GE(v[d], c.lower[d]);
      EXPECT_LE(v[d], c.upper[d]);
    }
  }
  EXPECT_NO_THROW(r.theta.Validate());
  EXPECT_DOUBLE_EQ(r.theta.density, c.lower[0]);
}

TEST(GroundingTest, BestSoFarIsMonotoneAndEqualsReturnedResidual) {
  const Objective f = [](const LatentFactors& t) {
    return std::sin(5 * t.friction) + t.restitution * t.restitution;
  };
  const CemResult r = MinimizeCem(f, SmallCem(), 500);
  double prev = std::numeric_limits<double>::infinity();
  for (const CemRound& round : r.rounds) {
    EXPECT_LE(round.best_so_far, prev);
    EXPECT_LE(round.best_so_far, round.round_best);
    prev = round.best_so_far;
  }
  EXPECT_EQ(r.rounds.back().best_so_far, r.residual);
}

// Recomputes the first round's refit from the recorded samples.
TEST(GroundingTest, RefitUsesMeanAndStdOfLowestElites) {
  CemConfig c;
  c.rounds = 1;
  c.samples_per_round = 50;
  c.elite_count = 7;
  std::mutex mu;
  std::vector<std::pair<double, LatentVector>> seen;
  const Objective f = [&](const LatentFactors& t) {
    const double v = std::pow(t.friction - 1.3, 2) + t.density;
    std::lock_guard<std::mutex> lock(mu);
    seen.emplace_back(v, ToVector(t));
    return v;
  };
  const CemResult r = MinimizeCem(f, c, 1000);
  std::sort(seen.begin(), seen.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  for (int d = 0; d < 3; ++d) {
    double m = 0.0;
    for (int e = 0; e < 7; ++e) m += seen[e].second[d] / 7.0;
    double var = 0.0;
    for (int e = 0; e < 7; ++e) var += std::pow(seen[e].second[d] - m, 2) / 7.0;
    EXPECT_NEAR(r.final_mean[d], m, 1e-12);
    EXPECT_NEAR(r.final_stddev[d], std::max(std::sqrt(var), kCemStdFloor),
                1e-12);
  }
  EXPECT_EQ(ToVector(r.theta), seen[0].second);
}

TEST(GroundingTest, CollapsedEliteSpreadHitsStdFloor) {
  CemConfig c = SmallCem();
  c.lower = {1.0, 0.5, 0.5};
  c.upper = {1.0, 0.5, 0.5};
  const CemResult r =
      MinimizeCem([](const LatentFactors&) { return 1.0; }, c, 2);
  EXPECT_TRUE(r.rounds.front().std_floored);
  for (double s : r.final_stddev) EXPECT_EQ(s, kCemStdFloor);
}

TEST(GroundingTest, AllDivergingRoundThrows) {
  const Objective f = [](const LatentFactors&) {
    return std::numeric_limits<double>::infinity();
  };
  EXPECT_THROW(MinimizeCem(f, SmallCem(), 3), std::runtime_error);
}

TEST(GroundingTest, ConfigValidation) {
  CemConfig c;
  EXPECT_NO_THROW(c.Validate());
  c.elite_count = c.samples_per_round + 1;
  EXPECT_THROW(c.Validate(), std::invalid_argument);
  c = CemConfig{};
  c.stddev[1] = 0.0;
  EXPECT_THROW(c.Validate(), std::invalid_argument);
  c = CemConfig{};
  c.lower[2] = 0.9;
  c.upper[2] = 0.1;
  EXPECT_THROW(c.Validate(), std::invalid_argument);
  c = CemConfig{};
  c.upper[2] = 1.5;
  EXPECT_THROW(c.Validate(), std::invalid_argument);
  EXPECT_THROW(EstimateLatents(RealDataset{}, CemConfig{}, EnvironmentSpec{}, 0),
               std::invalid_argument);
}

TEST(GroundingTest, DefaultBoundsAreRandomizationRanges) {
  const CemConfig c;
  EXPECT_EQ(c.lower, (LatentVector{0.1, 0.0, 0.0}));
  EXPECT_EQ(c.upper, (LatentVector{20.0, 3.0, 1.0}));
}

TEST(GroundingTest, EstimationLogHasOneLinePerRound) {
  const CemResult r = MinimizeCem(
      [](const LatentFactors& t) { return t.friction; }, SmallCem(), 4);
  const std::string log = EstimationLog(r);
  EXPECT_EQ(std::count(log.begin(), log.end(), '\n'), 8);
}

}  // namespace
}  // namespace simground
