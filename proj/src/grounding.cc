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

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include <fmt/format.h>

#include "simground/parallel.h"
#include "simground/rng.h"

namespace simground {

double TrajectoryResidual(const Trajectory& real, const Trajectory& sim) {
  const std::size_t frames = std::min(real.frames.size(), sim.frames.size());
  if (frames == 0) {
    throw InvalidComparison("trajectories share no observation frame");
  }
  if (real.dynamic_bodies.size() != sim.dynamic_bodies.size()) {
    throw InvalidComparison("trajectories have different dynamic bodies");
  }
  double total = 0.0;
  for (std::size_t f = 0; f < frames; ++f) {
    const auto& a = real.frames[f].states;
    const auto& b = sim.frames[f].states;
    if (a.size() != b.size()) {
      throw InvalidComparison("frames have different body counts");
    }
    for (std::size_t i = 0; i < a.size(); ++i) {
      const Vec2 d = a[i].position - b[i].position;
      total += Dot(d, d);
    }
  }
  return total / static_cast<double>(frames);
}

RealSample CollectSample(const TaskSpec& task, const Action& action,
                         const EnvironmentSpec& env) {
  return {task, action, RunAction(task, action, env).trajectory};
}

double Residual(const LatentFactors& theta, const RealDataset& data,
                const EnvironmentSpec& sim_env) {
  if (data.empty()) throw std::invalid_argument("empty real dataset");
  EnvironmentSpec env = sim_env;
  env.latents = theta;
  double total = 0.0;
  for (const RealSample& s : data.samples) {
    try {
      const TaskRun run = RunAction(s.task, s.action, env);
      total += TrajectoryResidual(s.trajectory, run.trajectory);
    } catch (const SimulationDiverged&) {
      return std::numeric_limits<double>::infinity();
    }
  }
  return total / static_cast<double>(data.size());
}

LatentVector ToVector(const LatentFactors& f) {
  return {f.density, f.friction, f.restitution};
}

LatentFactors FromVector(const LatentVector& v) { return {v[0], v[1], v[2]}; }

void CemConfig::Validate() const {
  if (rounds <= 0) throw std::invalid_argument("CEM rounds must be positive");
  if (samples_per_round <= 0) {
    throw std::invalid_argument("CEM samples_per_round must be positive");
  }
  if (elite_count <= 0 || elite_count > samples_per_round) {
    throw std::invalid_argument(
        "CEM elite_count must be in [1, samples_per_round]");
  }
  for (int d = 0; d < 3; ++d) {
    if (!(stddev[d] > 0.0)) {
      throw std::invalid_argument("CEM stddev components must be positive");
    }
    if (!(lower[d] <= upper[d])) {
      throw std::invalid_argument("CEM bounds are inverted");
    }
  }
  FromVector(lower).Validate();
  FromVector(upper).Validate();
}

CemConfig DefaultCemConfig(Family family) {
  CemConfig c;
  if (family == Family::kBasketball) {
    c.mean[1] = 0.5;
    c.stddev[1] = 0.25;
  }
  return c;
}

CemResult MinimizeCem(const Objective& objective, const CemConfig& config,
                      std::uint64_t seed) {
  config.Validate();
  Rng rng = Substream(seed, "cem");
  CemResult result;
  LatentVector mean = config.mean;
  LatentVector stddev = config.stddev;
  double best = std::numeric_limits<double>::infinity();
  LatentVector best_x = mean;
  bool have_best = false;

  const int n = config.samples_per_round;
  std::vector<LatentVector> samples(n);
  std::vector<double> values(n);
  std::vector<int> order(n);
  for (int round = 0; round < config.rounds; ++round) {
    for (LatentVector& x : samples) {
      for (int d = 0; d < 3; ++d) {
        const double v = mean[d] + stddev[d] * StandardNormal(rng);
        x[d] = std::clamp(v, config.lower[d], config.upper[d]);
      }
    }
    ParallelFor(n, [&](int i) { values[i] = objective(FromVector(samples[i])); });
    result.evaluations += n;

    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
      // NaN sorts last.
      const double va = std::isnan(values[a]) ? INFINITY : values[a];
      const double vb = std::isnan(values[b]) ? INFINITY : values[b];
      return va < vb;
    });
    const double round_best = values[order[0]];
    if (!std::isfinite(round_best)) {
      throw std::runtime_error(
          fmt::format("CEM round {}: every sample diverged", round));
    }
    if (!have_best || round_best < best) {
      best = round_best;
      best_x = samples[order[0]];
      have_best = true;
    }

    const int k = config.elite_count;
    CemRound record;
    record.round = round;
    record.round_best = round_best;
    record.best_so_far = best;
    for (int d = 0; d < 3; ++d) {
      double m = 0.0;
      for (int e = 0; e < k; ++e) m += samples[order[e]][d];
      m /= k;
      double var = 0.0;
      for (int e = 0; e < k; ++e) {
        const double diff = samples[order[e]][d] - m;
        var += diff * diff;
      }
      var /= k;
      mean[d] = m;
      stddev[d] = std::sqrt(var);
      if (stddev[d] < kCemStdFloor) {
        stddev[d] = kCemStdFloor;
        record.std_floored = true;
      }
    }
    record.mean = mean;
    record.stddev = stddev;
    result.rounds.push_back(record);
  }
  result.theta = FromVector(best_x);
  result.residual = best;
  result.final_mean = mean;
  result.final_stddev = stddev;
  return result;
}

CemResult EstimateLatents(const RealDataset& data, const CemConfig& config,
                          const EnvironmentSpec& sim_env, std::uint64_t seed) {
  if (data.empty()) throw std::invalid_argument("empty real dataset");
  return MinimizeCem(
      [&](const LatentFactors& theta) {
        return Residual(theta, data, sim_env);
      },
      config, seed);
}

std::string EstimationLog(const CemResult& result) {
  std::ostringstream out;
  for (const CemRound& r : result.rounds) {
    out << fmt::format(
        "{{\"round\":{},\"round_best\":{:.9g},\"best_residual\":{:.9g},"
        "\"mean\":[{:.9g},{:.9g},{:.9g}],\"std\":[{:.9g},{:.9g},{:.9g}],"
        "\"std_floored\":{}}}\n",
        r.round, r.round_best, r.best_so_far, r.mean[0], r.mean[1], r.mean[2],
        r.stddev[0], r.stddev[1], r.stddev[2], r.std_floored);
  }
  return out.str();
}

}  // namespace simground
