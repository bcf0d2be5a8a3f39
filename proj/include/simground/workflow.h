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

// The grounding loop: simulate candidate actions under the current
// estimate, spend a few real interactions on the most informative ones and
// refit the latents on everything collected so far.

#ifndef SIMGROUND_WORKFLOW_H_
#define SIMGROUND_WORKFLOW_H_

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "simground/exploration.h"
#include "simground/grounding.h"
#include "simground/physics.h"
#include "simground/tasks.h"

namespace simground {

inline constexpr int kDefaultCandidatePool = 1000;

struct IplwConfig {
  StrategySpec strategy;
  int actions_per_round = 50;
  int max_rounds = 10;
  double min_residual = 1e-3;
  int candidate_pool = kDefaultCandidatePool;
  CemConfig cem;
  EnvironmentSpec real_env;
  EnvironmentSpec sim_env;
  std::uint64_t seed = 0;

  void Validate() const;
};

struct IplwRound {
  int round = 0;
  // (task id, action index) of every real interaction spent this round.
  std::vector<std::pair<int, int>> selected;
  int candidates = 0;
  // Best residual of this round's fit over the cumulative dataset, and the
  // running minimum over rounds.
  double best_residual = 0.0;
  double best_so_far = 0.0;
  LatentFactors theta;
  // Gradient strategy only.
  GradientProbe probe;
  int real_interactions = 0;
};

struct IplwLog {
  LatentFactors initial_theta;
  std::vector<IplwRound> rounds;
  int real_interactions = 0;
  bool stopped_on_residual = false;
};

struct IplwResult {
  LatentFactors theta;
  IplwLog log;
  RealDataset data;
};

// Runs the loop on `tasks` (a training split). Throws std::invalid_argument
// on a bad config or empty task list.
IplwResult RunIplw(const std::vector<TaskSpec>& tasks, const IplwConfig& cfg);

// One JSON line per round followed by a summary line.
std::string IplwLogText(const IplwLog& log);

}  // namespace simground

#endif  // SIMGROUND_WORKFLOW_H_
