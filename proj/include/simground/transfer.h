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

// Simulation-trained action rankers, jump-start evaluation with AUCCESS,
// baselines and performance surfaces over (friction, restitution).

#ifndef SIMGROUND_TRANSFER_H_
#define SIMGROUND_TRANSFER_H_

#include <array>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "simground/physics.h"
#include "simground/tasks.h"

namespace simground {

struct TaskRanking {
  int task_id = 0;
  // Action indices, best first. Covers every action exactly once.
  std::vector<int> order;
  // Score per action index.
  std::vector<double> scores;
};

struct ActionRanker {
  std::vector<TaskRanking> tasks;

  const TaskRanking& ForTask(int task_id) const;
};

// Orders actions by score descending, ties by index. -infinity is allowed.
TaskRanking RankByScore(int task_id, std::vector<double> scores);

// Simulates every action of every task under `theta` in `sim_env` (ideal
// by default) and ranks by progress score. Diverged rollouts score
// -infinity.
ActionRanker TrainSimRanker(const LatentFactors& theta,
                            const std::vector<TaskSpec>& tasks,
                            const EnvironmentSpec& sim_env = {});

inline constexpr int kAuccessAttempts = 100;

// w_k = ln(k + 1) - ln(k).
double AuccessWeight(int k);

struct AuccessReport {
  // success[k - 1] is the fraction of tasks solved within k attempts.
  std::array<double, kAuccessAttempts> success{};
  std::array<double, kAuccessAttempts> weights{};
  double auccess = 0.0;
  // 1-based attempt of the first success per task; 0 if none in budget.
  std::vector<int> first_solve;
};

// Builds the report from per-task first-success attempts.
AuccessReport AuccessFromFirstSolves(const std::vector<int>& first_solve);

// Caches real-environment outcomes per (task, action) so that repeated
// evaluations in one environment share rollouts.
class SuccessOracle {
 public:
  explicit SuccessOracle(const EnvironmentSpec& env);

  const EnvironmentSpec& env() const { return env_; }
  bool Solved(const TaskSpec& task, int action_index);
  // Evaluates every action of every task up front.
  void Precompute(const std::vector<TaskSpec>& tasks);
  int rollouts() const { return rollouts_; }

 private:
  EnvironmentSpec env_;
  // task key -> per-action outcome: -1 unknown, 0 fail, 1 solved.
  std::map<std::pair<int, int>, std::vector<signed char>> table_;
  int rollouts_ = 0;
};

// Attempts actions in ranker order in the real environment, up to 100 per
// task.
AuccessReport Auccess(const ActionRanker& ranker,
                      const std::vector<TaskSpec>& tasks,
                      SuccessOracle& real);
AuccessReport Auccess(const ActionRanker& ranker,
                      const EnvironmentSpec& real_env,
                      const std::vector<TaskSpec>& tasks);

// Text form: one JSON line per k plus a summary line.
std::string AuccessReportText(const AuccessReport& report);

struct SurfaceGrid {
  double friction_min = 0.1;
  double friction_max = 1.2;
  int friction_count = 6;
  double restitution_min = 0.1;
  double restitution_max = 0.95;
  int restitution_count = 6;

  std::vector<double> FrictionAxis() const;
  std::vector<double> RestitutionAxis() const;
  void Validate() const;
};

struct PerformanceSurface {
  std::vector<double> friction;
  std::vector<double> restitution;
  // Row-major: j[i * restitution.size() + k] is the cell (friction[i],
  // restitution[k]).
  std::vector<double> j;
  double proxy_damping = 1.0;
  double density = 1.0;
  // Cells whose evaluation failed and were filled from their neighbours.
  std::vector<int> invalid_cells;

  double At(int fi, int ri) const;
  // Bilinear interpolation, clamped to the grid hull.
  double Interpolate(double friction, double restitution) const;
  bool InHull(double friction, double restitution) const;
  // Mean over friction rows of the variance along restitution, and the
  // converse.
  double RestitutionAxisVariance() const;
  double FrictionAxisVariance() const;
  // Throws std::invalid_argument on a malformed surface.
  void Validate() const;
};

// Trains a sim ranker at every grid cell and scores it with AUCCESS in the
// proxy environment on `tasks`.
PerformanceSurface BuildPerformanceSurface(const SurfaceGrid& grid,
                                           const EnvironmentSpec& proxy_env,
                                           const std::vector<TaskSpec>& tasks,
                                           double density);

// JSON text round trip. ParseSurface throws std::invalid_argument.
std::string SurfaceToText(const PerformanceSurface& surface);
PerformanceSurface ParseSurface(const std::string& text);

struct LatentBounds {
  std::array<double, 3> lower{0.1, 0.0, 0.0};
  std::array<double, 3> upper{20.0, 3.0, 1.0};
};

inline constexpr int kDomainRandomizationDraws = 10;

// Ranks by mean progress over `draws` uniformly sampled latent triples.
ActionRanker BaselineDomainRandomization(std::uint64_t seed,
                                         const std::vector<TaskSpec>& tasks,
                                         int draws = kDomainRandomizationDraws,
                                         const LatentBounds& bounds = {},
                                         const EnvironmentSpec& sim_env = {});

// Uniformly random attempt order with no simulator knowledge.
ActionRanker RandomOrderRanker(std::uint64_t seed,
                               const std::vector<TaskSpec>& tasks);
AuccessReport BaselineDirect(SuccessOracle& real,
                             const std::vector<TaskSpec>& tasks,
                             std::uint64_t seed);

}  // namespace simground

#endif  // SIMGROUND_TRANSFER_H_
