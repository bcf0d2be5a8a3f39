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

// Latent-factor estimation: trajectory residuals against recorded real
// rollouts, minimised with the cross-entropy method.

#ifndef SIMGROUND_GROUNDING_H_
#define SIMGROUND_GROUNDING_H_

#include <array>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "simground/physics.h"
#include "simground/tasks.h"

namespace simground {

// Thrown when two trajectories share no observation frame.
class InvalidComparison : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Mean over the common frames of the summed squared position error of every
// dynamic body. Frames are compared up to the shorter trajectory.
double TrajectoryResidual(const Trajectory& real, const Trajectory& sim);

struct RealSample {
  TaskSpec task;
  Action action;
  Trajectory trajectory;
};

// Real rollouts, all from one environment.
struct RealDataset {
  std::vector<RealSample> samples;

  bool empty() const { return samples.empty(); }
  int size() const { return static_cast<int>(samples.size()); }
};

// Rolls out `action` on `task` in `env` and records it.
RealSample CollectSample(const TaskSpec& task, const Action& action,
                         const EnvironmentSpec& env);

// Mean trajectory residual over the dataset with every action re-simulated
// in `sim_env` under latents `theta`. Returns +infinity if any rollout
// diverges. Throws std::invalid_argument on an empty dataset.
double Residual(const LatentFactors& theta, const RealDataset& data,
                const EnvironmentSpec& sim_env);

// Dimension order everywhere: density, friction, restitution.
using LatentVector = std::array<double, 3>;

LatentVector ToVector(const LatentFactors& f);
LatentFactors FromVector(const LatentVector& v);

struct CemConfig {
  int rounds = 10;
  int samples_per_round = 1000;
  int elite_count = 200;
  LatentVector mean{1.0, 1.0, 0.5};
  LatentVector stddev{0.5, 0.5, 0.25};
  LatentVector lower{0.1, 0.0, 0.0};
  LatentVector upper{20.0, 3.0, 1.0};

  // Throws std::invalid_argument when the config is unusable.
  void Validate() const;
};

inline constexpr double kCemStdFloor = 1e-4;

// Default config for a family; Basketball uses a tighter friction prior.
CemConfig DefaultCemConfig(Family family);

struct CemRound {
  int round = 0;
  // Lowest residual drawn this round and over all rounds so far.
  double round_best = 0.0;
  double best_so_far = 0.0;
  // Sampling distribution refit from this round's elites.
  LatentVector mean{};
  LatentVector stddev{};
  bool std_floored = false;
};

struct CemResult {
  LatentFactors theta;
  double residual = 0.0;
  LatentVector final_mean{};
  LatentVector final_stddev{};
  std::vector<CemRound> rounds;
  int evaluations = 0;
};

using Objective = std::function<double(const LatentFactors&)>;

// Cross-entropy minimisation of `objective` over the clipped box. Samples are
// evaluated in parallel; ties are broken by sample index so the result only
// depends on the seed.
CemResult MinimizeCem(const Objective& objective, const CemConfig& config,
                      std::uint64_t seed);

// Fits latents to a real dataset. Throws std::invalid_argument if the
// dataset is empty, std::runtime_error if every sample of a round diverges.
CemResult EstimateLatents(const RealDataset& data, const CemConfig& config,
                          const EnvironmentSpec& sim_env, std::uint64_t seed);

// One JSON line per CEM round.
std::string EstimationLog(const CemResult& result);

}  // namespace simground

#endif  // SIMGROUND_GROUNDING_H_
