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

// Action grouping by contact statistics and the action-selection strategies
// used to pick which real interactions to spend.

#ifndef SIMGROUND_EXPLORATION_H_
#define SIMGROUND_EXPLORATION_H_

#include <array>
#include <cstdint>
#include <memory>
#include <span>
#include <string_view>
#include <vector>

#include "simground/physics.h"
#include "simground/rng.h"
#include "simground/tasks.h"
#include "simground/transfer.h"

namespace simground {

enum class StrategyKind { kCollisions, kRolling, kRandom, kMixed, kGradient };

std::string_view StrategyName(StrategyKind kind);
// Throws std::invalid_argument on unknown names.
StrategyKind ParseStrategy(std::string_view name);

struct StrategySpec {
  StrategyKind kind = StrategyKind::kMixed;
  // Required for kGradient.
  std::shared_ptr<const PerformanceSurface> surface;
  std::uint64_t seed = 0;

  // Throws std::invalid_argument if kGradient has no surface.
  void Validate() const;
};

// New contacts between two latent-material bodies (ball-ball in Bowling,
// ball-plank in Basketball).
int CountBallCollisions(const Trajectory& traj);
// Steps summed over dynamic balls with a near-vertical floor contact.
int RollingTimesteps(const Trajectory& traj);

// Selection probability per latent factor. Index 0 is friction, which
// drives rolling actions; index 1 is restitution, which drives collision
// actions.
struct ActionTypeProbabilities {
  std::array<double, 2> p{0.5, 0.5};

  double rolling() const { return p[0]; }
  double collision() const { return p[1]; }
};

inline constexpr double kSensitivityFloor = 1e-6;

// P_k = X_k / sum(X) with X_k = max(|g_k|, kSensitivityFloor).
std::vector<double> SensitivityProbabilities(std::span<const double> partials);

struct GradientProbe {
  ActionTypeProbabilities probabilities;
  // dJ/dfriction and dJ/drestitution.
  std::array<double, 2> partials{};
  // True if the estimate was outside the grid hull and got clamped.
  bool clamped = false;
};

// Central differences with a step of one grid cell on the bilinear surface.
// Throws std::invalid_argument for grids smaller than 2x2.
GradientProbe GradientActionProbabilities(const PerformanceSurface& surface,
                                          const LatentFactors& estimate);

struct Selection {
  // Indices into the candidate list, in selection order.
  std::vector<int> chosen;
  // Present for the gradient strategy.
  GradientProbe probe;
};

// Picks n distinct candidates according to the strategy. Throws
// std::invalid_argument if n exceeds the candidate count or the lists are
// misaligned.
Selection RankAndSelect(std::span<const Trajectory> sim_trajs,
                        const StrategySpec& strategy, int n,
                        const LatentFactors& estimate, Rng& rng);

// Same selection, returning the chosen actions.
std::vector<Action> RankAndSelectActions(std::span<const Action> candidates,
                                         std::span<const Trajectory> sim_trajs,
                                         const StrategySpec& strategy, int n,
                                         const LatentFactors& estimate,
                                         Rng& rng);

}  // namespace simground

#endif  // SIMGROUND_EXPLORATION_H_
