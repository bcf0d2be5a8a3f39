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

#include "simground/workflow.h"

#include <algorithm>
#include <limits>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include <fmt/format.h>

#include "simground/parallel.h"
#include "simground/rng.h"

namespace simground {
namespace {

LatentFactors DrawPrior(const CemConfig& cem, Rng& rng) {
  LatentVector v;
  for (int d = 0; d < 3; ++d) {
    v[d] = std::clamp(cem.mean[d] + cem.stddev[d] * StandardNormal(rng),
                      cem.lower[d], cem.upper[d]);
  }
  return FromVector(v);
}

}  // namespace

void IplwConfig::Validate() const {
  strategy.Validate();
  if (actions_per_round <= 0) {
    throw std::invalid_argument("actions_per_round must be positive");
  }
  if (max_rounds <= 0) throw std::invalid_argument("max_rounds must be positive");
  if (!(min_residual > 0.0)) {
    throw std::invalid_argument("min_residual must be positive");
  }
  if (candidate_pool < actions_per_round) {
    throw std::invalid_argument("candidate_pool smaller than actions_per_round");
  }
  cem.Validate();
  real_env.Validate();
  sim_env.Validate();
}

IplwResult RunIplw(const std::vector<TaskSpec>& tasks, const IplwConfig& cfg) {
  cfg.Validate();
  if (tasks.empty()) throw std::invalid_argument("IPLW needs tasks");

  Rng prior_rng = Substream(cfg.seed, "prior");
  Rng candidate_rng = Substream(cfg.seed, "candidates");
  Rng selection_rng = Substream(cfg.seed, "selection");

  IplwResult result;
  result.theta = DrawPrior(cfg.cem, prior_rng);
  result.log.initial_theta = result.theta;

  // Every (task, action) pair, flattened; used pairs are swapped out of the
  // live prefix so they are never offered again.
  std::vector<std::pair<int, int>> pairs;
  for (std::size_t t = 0; t < tasks.size(); ++t) {
    for (int a = 0; a < tasks[t].action_count(); ++a) {
      pairs.emplace_back(static_cast<int>(t), a);
    }
  }
  std::size_t live = pairs.size();

  CemConfig cem = cfg.cem;
  double best_so_far = std::numeric_limits<double>::infinity();
  EnvironmentSpec sim_env = cfg.sim_env;
  for (int round = 0; round < cfg.max_rounds; ++round) {
    const int pool =
        static_cast<int>(std::min<std::size_t>(cfg.candidate_pool, live));
    if (pool < cfg.actions_per_round) {
      throw std::runtime_error("not enough unused actions for another round");
    }
    // Partial Fisher-Yates over the live prefix.
    for (int k = 0; k < pool; ++k) {
      const std::size_t j = k + UniformIndex(candidate_rng,
                                             static_cast<int>(live - k));
      std::swap(pairs[k], pairs[j]);
    }

    sim_env.latents = result.theta;
    std::vector<Trajectory> sims(pool);
    ParallelFor(pool, [&](int i) {
      const auto [t, a] = pairs[i];
      try {
        sims[i] = RunAction(tasks[t], DecodeAction(tasks[t], a), sim_env)
                      .trajectory;
      } catch (const SimulationDiverged&) {
        sims[i] = Trajectory{};
      }
    });

    const Selection sel =
        RankAndSelect(sims, cfg.strategy, cfg.actions_per_round, result.theta,
                      selection_rng);

    IplwRound record;
    record.round = round;
    record.candidates = pool;
    record.probe = sel.probe;
    std::vector<std::size_t> chosen_slots(sel.chosen.begin(), sel.chosen.end());
    std::vector<RealSample> fresh(chosen_slots.size());
    ParallelFor(static_cast<int>(chosen_slots.size()), [&](int i) {
      const auto [t, a] = pairs[chosen_slots[i]];
      fresh[i] = CollectSample(tasks[t], DecodeAction(tasks[t], a),
                               cfg.real_env);
    });
    for (std::size_t i = 0; i < chosen_slots.size(); ++i) {
      const auto [t, a] = pairs[chosen_slots[i]];
      record.selected.emplace_back(tasks[t].id, a);
      result.data.samples.push_back(std::move(fresh[i]));
    }
    result.log.real_interactions += static_cast<int>(chosen_slots.size());
    record.real_interactions = result.log.real_interactions;

    // Retire the chosen pairs: move them past the live prefix, highest slot
    // first so earlier swaps do not disturb later ones.
    std::sort(chosen_slots.rbegin(), chosen_slots.rend());
    for (std::size_t slot : chosen_slots) {
      --live;
      std::swap(pairs[slot], pairs[live]);
    }

    const std::uint64_t cem_seed = Substream(cfg.seed, fmt::format("cem-{}", round))();
    const CemResult fit = EstimateLatents(result.data, cem, cfg.sim_env, cem_seed);
    cem.mean = fit.final_mean;
    cem.stddev = fit.final_stddev;
    result.theta = fit.theta;
    best_so_far = std::min(best_so_far, fit.residual);
    record.best_residual = fit.residual;
    record.best_so_far = best_so_far;
    record.theta = fit.theta;
    result.log.rounds.push_back(std::move(record));
    if (fit.residual < cfg.min_residual) {
      result.log.stopped_on_residual = true;
      break;
    }
  }
  return result;
}

std::string IplwLogText(const IplwLog& log) {
  std::ostringstream out;
  for (const IplwRound& r : log.rounds) {
    std::vector<std::string> sel;
    sel.reserve(r.selected.size());
    for (const auto& [t, a] : r.selected) sel.push_back(fmt::format("[{},{}]", t, a));
    out << fmt::format(
        "{{\"round\":{},\"candidates\":{},\"selected\":[{}],"
        "\"best_residual\":{:.9g},\"best_so_far\":{:.9g},"
        "\"theta\":[{:.9g},{:.9g},{:.9g}],"
        "\"p_rolling\":{:.9g},\"p_collision\":{:.9g},\"clamped\":{},"
        "\"real_interactions\":{}}}\n",
        r.round, r.candidates, fmt::join(sel, ","), r.best_residual,
        r.best_so_far, r.theta.density, r.theta.friction, r.theta.restitution,
        r.probe.probabilities.rolling(), r.probe.probabilities.collision(),
        r.probe.clamped, r.real_interactions);
  }
  out << fmt::format(
      "{{\"initial_theta\":[{:.9g},{:.9g},{:.9g}],\"rounds\":{},"
      "\"real_interactions\":{},\"stopped_on_residual\":{}}}\n",
      log.initial_theta.density, log.initial_theta.friction,
      log.initial_theta.restitution, log.rounds.size(), log.real_interactions,
      log.stopped_on_residual);
  return out.str();
}

}  // namespace simground
