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

#include "simground/exploration.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include <fmt/format.h>

namespace simground {
namespace {

// Candidate indices sorted by key descending, ties by index.
std::vector<int> RankBy(std::span<const Trajectory> trajs,
                        int (*key)(const Trajectory&)) {
  std::vector<int> keys(trajs.size());
  for (std::size_t i = 0; i < trajs.size(); ++i) keys[i] = key(trajs[i]);
  std::vector<int> order(trajs.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return keys[a] > keys[b]; });
  return order;
}

// Walks a ranking, skipping already chosen candidates.
class Cursor {
 public:
  explicit Cursor(std::vector<int> order) : order_(std::move(order)) {}

  int Next(const std::vector<char>& used) {
    while (pos_ < order_.size() && used[order_[pos_]]) ++pos_;
    if (pos_ == order_.size()) throw std::logic_error("ranking exhausted");
    return order_[pos_++];
  }

 private:
  std::vector<int> order_;
  std::size_t pos_ = 0;
};

}  // namespace

std::string_view StrategyName(StrategyKind kind) {
  switch (kind) {
    case StrategyKind::kCollisions:
      return "collisions";
    case StrategyKind::kRolling:
      return "rolling";
    case StrategyKind::kRandom:
      return "random";
    case StrategyKind::kMixed:
      return "mixed";
    case StrategyKind::kGradient:
      return "gradient";
  }
  return "unknown";
}

StrategyKind ParseStrategy(std::string_view name) {
  for (StrategyKind k :
       {StrategyKind::kCollisions, StrategyKind::kRolling,
        StrategyKind::kRandom, StrategyKind::kMixed, StrategyKind::kGradient}) {
    if (StrategyName(k) == name) return k;
  }
  throw std::invalid_argument(fmt::format("unknown strategy '{}'", name));
}

void StrategySpec::Validate() const {
  if (kind == StrategyKind::kGradient && !surface) {
    throw std::invalid_argument("gradient strategy requires a surface");
  }
}

int CountBallCollisions(const Trajectory& traj) { return traj.ball_collisions; }

int RollingTimesteps(const Trajectory& traj) {
  return traj.TotalRollingSteps();
}

std::vector<double> SensitivityProbabilities(std::span<const double> partials) {
  if (partials.empty()) throw std::invalid_argument("no partials");
  std::vector<double> x(partials.size());
  double z = 0.0;
  for (std::size_t k = 0; k < partials.size(); ++k) {
    x[k] = std::max(std::abs(partials[k]), kSensitivityFloor);
    z += x[k];
  }
  for (double& v : x) v /= z;
  return x;
}

GradientProbe GradientActionProbabilities(const PerformanceSurface& surface,
                                          const LatentFactors& estimate) {
  if (surface.friction.size() < 2 || surface.restitution.size() < 2) {
    throw std::invalid_argument("surface gradient needs at least a 2x2 grid");
  }
  GradientProbe probe;
  const double f_lo = surface.friction.front();
  const double f_hi = surface.friction.back();
  const double e_lo = surface.restitution.front();
  const double e_hi = surface.restitution.back();
  const double f = std::clamp(estimate.friction, f_lo, f_hi);
  const double e = std::clamp(estimate.restitution, e_lo, e_hi);
  probe.clamped = f != estimate.friction || e != estimate.restitution;

  // One grid cell on each side; Interpolate clamps at the hull, so the
  // difference quotient uses the actual distance between probe points.
  const double hf = (f_hi - f_lo) / (surface.friction.size() - 1);
  const double he = (e_hi - e_lo) / (surface.restitution.size() - 1);
  const double f0 = std::max(f_lo, f - hf);
  const double f1 = std::min(f_hi, f + hf);
  const double e0 = std::max(e_lo, e - he);
  const double e1 = std::min(e_hi, e + he);
  probe.partials[0] =
      (surface.Interpolate(f1, e) - surface.Interpolate(f0, e)) / (f1 - f0);
  probe.partials[1] =
      (surface.Interpolate(f, e1) - surface.Interpolate(f, e0)) / (e1 - e0);
  const std::vector<double> p = SensitivityProbabilities(probe.partials);
  probe.probabilities.p = {p[0], p[1]};
  return probe;
}

Selection RankAndSelect(std::span<const Trajectory> sim_trajs,
                        const StrategySpec& strategy, int n,
                        const LatentFactors& estimate, Rng& rng) {
  strategy.Validate();
  const int count = static_cast<int>(sim_trajs.size());
  if (n < 0 || n > count) {
    throw std::invalid_argument(fmt::format(
        "cannot select {} actions from {} candidates", n, count));
  }
  Selection sel;
  std::vector<char> used(count, 0);
  auto take = [&](int i) {
    used[i] = 1;
    sel.chosen.push_back(i);
  };

  switch (strategy.kind) {
    case StrategyKind::kCollisions:
    case StrategyKind::kRolling: {
      const auto order =
          RankBy(sim_trajs, strategy.kind == StrategyKind::kCollisions
                                ? &CountBallCollisions
                                : &RollingTimesteps);
      for (int k = 0; k < n; ++k) take(order[k]);
      break;
    }
    case StrategyKind::kRandom: {
      std::vector<int> pool(count);
      std::iota(pool.begin(), pool.end(), 0);
      for (int k = 0; k < n; ++k) {
        const int j = k + UniformIndex(rng, count - k);
        std::swap(pool[k], pool[j]);
        take(pool[k]);
      }
      break;
    }
    case StrategyKind::kMixed: {
      Cursor collisions(RankBy(sim_trajs, &CountBallCollisions));
      Cursor rolling(RankBy(sim_trajs, &RollingTimesteps));
      const int n_collision = n - n / 2;
      for (int k = 0; k < n_collision; ++k) take(collisions.Next(used));
      for (int k = 0; k < n / 2; ++k) take(rolling.Next(used));
      break;
    }
    case StrategyKind::kGradient: {
      sel.probe = GradientActionProbabilities(*strategy.surface, estimate);
      Cursor collisions(RankBy(sim_trajs, &CountBallCollisions));
      Cursor rolling(RankBy(sim_trajs, &RollingTimesteps));
      for (int k = 0; k < n; ++k) {
        const bool collision =
            UniformUnit(rng) < sel.probe.probabilities.collision();
        take(collision ? collisions.Next(used) : rolling.Next(used));
      }
      break;
    }
  }
  return sel;
}

std::vector<Action> RankAndSelectActions(std::span<const Action> candidates,
                                         std::span<const Trajectory> sim_trajs,
                                         const StrategySpec& strategy, int n,
                                         const LatentFactors& estimate,
                                         Rng& rng) {
  if (candidates.size() != sim_trajs.size()) {
    throw std::invalid_argument("candidates and trajectories misaligned");
  }
  const Selection sel = RankAndSelect(sim_trajs, strategy, n, estimate, rng);
  std::vector<Action> out;
  out.reserve(sel.chosen.size());
  for (int i : sel.chosen) out.push_back(candidates[i]);
  return out;
}

}  // namespace simground
