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

// Experiment configuration and the seeded end-to-end pipeline: ground the
// latents with IPLW, rank actions in the grounded simulator and score the
// ranking in the real environment.

#ifndef SIMGROUND_EXPERIMENT_H_
#define SIMGROUND_EXPERIMENT_H_

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "simground/exploration.h"
#include "simground/grounding.h"
#include "simground/tasks.h"
#include "simground/transfer.h"
#include "simground/workflow.h"

namespace simground {

inline constexpr std::uint64_t kDefaultSeeds[] = {50, 100, 150, 500, 1000};

struct ExperimentConfig {
  Family family = Family::kBowling;
  Scale scale = Scale::kDesk;
  std::vector<StrategyKind> strategies{StrategyKind::kMixed};
  std::vector<std::uint64_t> seeds{std::begin(kDefaultSeeds),
                                   std::end(kDefaultSeeds)};
  double real_damping = 0.8;
  double sim_damping = 1.0;
  int rounds = 10;
  int actions_per_round = 50;
  int candidate_pool = kDefaultCandidatePool;
  double min_residual = 1e-3;
  CemConfig cem;
  // Surface file for the gradient strategy.
  std::string surface_path;
  // Empty: nothing is written.
  std::string out_dir;

  // Throws std::invalid_argument on empty seeds or strategies, bad numbers,
  // or a gradient strategy whose surface file does not exist.
  void Validate() const;
  EnvironmentSpec RealEnv() const;
  EnvironmentSpec SimEnv() const;
};

// Family defaults with the family CEM prior.
ExperimentConfig DefaultExperimentConfig(Family family);

// INI text with sections [experiment], [environment], [iplw] and [cem].
// Missing keys keep their defaults; unknown keys are rejected. Throws
// std::invalid_argument.
ExperimentConfig ParseExperimentConfig(const std::string& text);
// Inverse of ParseExperimentConfig.
std::string ExperimentConfigText(const ExperimentConfig& cfg);
// Compact single-line JSON, embedded in every artifact.
std::string ExperimentConfigJson(const ExperimentConfig& cfg);

struct MeanStderr {
  double mean = 0.0;
  // Sample standard deviation over sqrt(n); 0 for a single value.
  double std_error = 0.0;
  int n = 0;
};
MeanStderr Summarize(std::span<const double> values);

struct SeedRun {
  StrategyKind strategy = StrategyKind::kMixed;
  std::uint64_t seed = 0;
  IplwResult iplw;
  AuccessReport report;
};

struct StrategySummary {
  StrategyKind strategy = StrategyKind::kMixed;
  MeanStderr jump_start;
};

struct ExperimentResult {
  // Strategy-major, seeds in config order.
  std::vector<SeedRun> runs;
  std::vector<StrategySummary> summary;
};

// Runs every (strategy, seed) pair: IPLW on the training split, a sim
// ranker under the estimate on the test split and AUCCESS in the real
// environment. `real` caches real outcomes and may be shared between calls
// with the same real environment; pass nullptr for a private cache. Writes
// artifacts when cfg.out_dir is set; existing files are only replaced with
// `force`.
ExperimentResult RunExperiment(const ExperimentConfig& cfg,
                               SuccessOracle* real = nullptr,
                               bool force = false);

// strategy,mean,stderr,seeds rows after a config comment line.
std::string SummaryCsv(const ExperimentResult& result,
                       const ExperimentConfig& cfg);

}  // namespace simground

#endif  // SIMGROUND_EXPERIMENT_H_
