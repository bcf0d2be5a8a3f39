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
#include <sstream>
#include <stdexcept>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "simground/parallel.h"
#include "simground/rng.h"

namespace simground {
namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double SafeProgress(const TaskSpec& task, int action,
                    const EnvironmentSpec& env) {
  try {
    return RunAction(task, DecodeAction(task, action), env).outcome.progress;
  } catch (const SimulationDiverged&) {
    return kNegInf;
  }
}

// Progress of every action of every task; tasks x actions, flattened per
// task.
std::vector<std::vector<double>> ProgressTable(
    const std::vector<TaskSpec>& tasks, const EnvironmentSpec& env) {
  std::vector<std::pair<int, int>> jobs;
  std::vector<std::vector<double>> table(tasks.size());
  for (std::size_t t = 0; t < tasks.size(); ++t) {
    table[t].assign(tasks[t].action_count(), 0.0);
    for (int a = 0; a < tasks[t].action_count(); ++a) {
      jobs.emplace_back(static_cast<int>(t), a);
    }
  }
  ParallelFor(static_cast<int>(jobs.size()), [&](int i) {
    const auto [t, a] = jobs[i];
    table[t][a] = SafeProgress(tasks[t], a, env);
  });
  return table;
}

std::pair<int, int> TaskKey(const TaskSpec& task) {
  return {static_cast<int>(task.family) * 2 + static_cast<int>(task.scale),
          task.id};
}

std::vector<double> Axis(double lo, double hi, int n) {
  std::vector<double> v(n);
  for (int i = 0; i < n; ++i) {
    v[i] = n == 1 ? lo : lo + (hi - lo) * i / static_cast<double>(n - 1);
  }
  return v;
}

double Variance(const std::vector<double>& v) {
  const double mean = std::accumulate(v.begin(), v.end(), 0.0) / v.size();
  double s = 0.0;
  for (double x : v) s += (x - mean) * (x - mean);
  return s / v.size();
}

// Index i with axis[i] <= x <= axis[i + 1], for a strictly increasing axis
// of at least two points and x inside it.
int Cell(const std::vector<double>& axis, double x) {
  const auto it = std::upper_bound(axis.begin(), axis.end(), x);
  int i = static_cast<int>(it - axis.begin()) - 1;
  return std::clamp(i, 0, static_cast<int>(axis.size()) - 2);
}

}  // namespace

const TaskRanking& ActionRanker::ForTask(int task_id) const {
  for (const TaskRanking& t : tasks) {
    if (t.task_id == task_id) return t;
  }
  throw std::out_of_range(fmt::format("ranker has no task {}", task_id));
}

TaskRanking RankByScore(int task_id, std::vector<double> scores) {
  TaskRanking r;
  r.task_id = task_id;
  r.order.resize(scores.size());
  std::iota(r.order.begin(), r.order.end(), 0);
  std::stable_sort(r.order.begin(), r.order.end(), [&](int a, int b) {
    const double sa = std::isnan(scores[a]) ? kNegInf : scores[a];
    const double sb = std::isnan(scores[b]) ? kNegInf : scores[b];
    return sa > sb;
  });
  r.scores = std::move(scores);
  return r;
}

ActionRanker TrainSimRanker(const LatentFactors& theta,
                            const std::vector<TaskSpec>& tasks,
                            const EnvironmentSpec& sim_env) {
  EnvironmentSpec env = sim_env;
  env.latents = theta;
  auto table = ProgressTable(tasks, env);
  ActionRanker ranker;
  for (std::size_t t = 0; t < tasks.size(); ++t) {
    ranker.tasks.push_back(RankByScore(tasks[t].id, std::move(table[t])));
  }
  return ranker;
}

double AuccessWeight(int k) {
  return std::log(static_cast<double>(k) + 1.0) -
         std::log(static_cast<double>(k));
}

AuccessReport AuccessFromFirstSolves(const std::vector<int>& first_solve) {
  if (first_solve.empty()) throw std::invalid_argument("no tasks");
  AuccessReport r;
  r.first_solve = first_solve;
  double num = 0.0;
  double den = 0.0;
  for (int k = 1; k <= kAuccessAttempts; ++k) {
    int solved = 0;
    for (int a : first_solve) solved += (a >= 1 && a <= k);
    const double s = static_cast<double>(solved) / first_solve.size();
    const double w = AuccessWeight(k);
    r.success[k - 1] = s;
    r.weights[k - 1] = w;
    num += w * s;
    den += w;
  }
  r.auccess = num / den;
  return r;
}

SuccessOracle::SuccessOracle(const EnvironmentSpec& env) : env_(env) {
  env_.Validate();
}

bool SuccessOracle::Solved(const TaskSpec& task, int action_index) {
  auto& row = table_[TaskKey(task)];
  if (row.empty()) row.assign(task.action_count(), -1);
  signed char& cell = row.at(action_index);
  if (cell < 0) {
    bool solved = false;
    try {
      solved =
          RunAction(task, DecodeAction(task, action_index), env_).outcome.solved;
    } catch (const SimulationDiverged&) {
      solved = false;
    }
    cell = solved ? 1 : 0;
    ++rollouts_;
  }
  return cell == 1;
}

void SuccessOracle::Precompute(const std::vector<TaskSpec>& tasks) {
  std::vector<std::pair<int, int>> jobs;
  for (std::size_t t = 0; t < tasks.size(); ++t) {
    auto& row = table_[TaskKey(tasks[t])];
    if (row.empty()) row.assign(tasks[t].action_count(), -1);
    for (int a = 0; a < tasks[t].action_count(); ++a) {
      if (row[a] < 0) jobs.emplace_back(static_cast<int>(t), a);
    }
  }
  std::vector<signed char> out(jobs.size());
  ParallelFor(static_cast<int>(jobs.size()), [&](int i) {
    const auto [t, a] = jobs[i];
    bool solved = false;
    try {
      solved = RunAction(tasks[t], DecodeAction(tasks[t], a), env_)
                   .outcome.solved;
    } catch (const SimulationDiverged&) {
      solved = false;
    }
    out[i] = solved ? 1 : 0;
  });
  for (std::size_t i = 0; i < jobs.size(); ++i) {
    table_[TaskKey(tasks[jobs[i].first])][jobs[i].second] = out[i];
  }
  rollouts_ += static_cast<int>(jobs.size());
}

AuccessReport Auccess(const ActionRanker& ranker,
                      const std::vector<TaskSpec>& tasks,
                      SuccessOracle& real) {
  if (tasks.empty()) throw std::invalid_argument("no tasks");
  std::vector<int> first(tasks.size(), 0);
  for (std::size_t t = 0; t < tasks.size(); ++t) {
    const TaskRanking& r = ranker.ForTask(tasks[t].id);
    const int budget =
        std::min<int>(kAuccessAttempts, static_cast<int>(r.order.size()));
    for (int k = 0; k < budget; ++k) {
      if (real.Solved(tasks[t], r.order[k])) {
        first[t] = k + 1;
        break;
      }
    }
  }
  return AuccessFromFirstSolves(first);
}

AuccessReport Auccess(const ActionRanker& ranker,
                      const EnvironmentSpec& real_env,
                      const std::vector<TaskSpec>& tasks) {
  SuccessOracle oracle(real_env);
  return Auccess(ranker, tasks, oracle);
}

std::string AuccessReportText(const AuccessReport& report) {
  std::ostringstream out;
  for (int k = 1; k <= kAuccessAttempts; ++k) {
    out << fmt::format("{{\"k\":{},\"w\":{:.9g},\"s\":{:.9g}}}\n", k,
                       report.weights[k - 1], report.success[k - 1]);
  }
  out << fmt::format("{{\"auccess\":{:.9g},\"first_solve\":[{}]}}\n",
                     report.auccess, fmt::join(report.first_solve, ","));
  return out.str();
}

std::vector<double> SurfaceGrid::FrictionAxis() const {
  return Axis(friction_min, friction_max, friction_count);
}

std::vector<double> SurfaceGrid::RestitutionAxis() const {
  return Axis(restitution_min, restitution_max, restitution_count);
}

void SurfaceGrid::Validate() const {
  if (friction_count < 1 || restitution_count < 1) {
    throw std::invalid_argument("surface grid needs at least one cell");
  }
  if (!(friction_min >= 0.0 && friction_max >= friction_min)) {
    throw std::invalid_argument("bad friction range");
  }
  if (!(restitution_min >= 0.0 && restitution_max <= 1.0 &&
        restitution_max >= restitution_min)) {
    throw std::invalid_argument("bad restitution range");
  }
}

double PerformanceSurface::At(int fi, int ri) const {
  return j.at(static_cast<std::size_t>(fi) * restitution.size() + ri);
}

bool PerformanceSurface::InHull(double f, double e) const {
  return f >= friction.front() && f <= friction.back() &&
         e >= restitution.front() && e <= restitution.back();
}

double PerformanceSurface::Interpolate(double f, double e) const {
  if (friction.size() < 2 || restitution.size() < 2) {
    throw std::invalid_argument("surface needs at least a 2x2 grid");
  }
  f = std::clamp(f, friction.front(), friction.back());
  e = std::clamp(e, restitution.front(), restitution.back());
  const int i = Cell(friction, f);
  const int k = Cell(restitution, e);
  const double tf = (f - friction[i]) / (friction[i + 1] - friction[i]);
  const double te =
      (e - restitution[k]) / (restitution[k + 1] - restitution[k]);
  return (1 - tf) * (1 - te) * At(i, k) + tf * (1 - te) * At(i + 1, k) +
         (1 - tf) * te * At(i, k + 1) + tf * te * At(i + 1, k + 1);
}

double PerformanceSurface::RestitutionAxisVariance() const {
  double total = 0.0;
  for (std::size_t i = 0; i < friction.size(); ++i) {
    std::vector<double> row(j.begin() + i * restitution.size(),
                            j.begin() + (i + 1) * restitution.size());
    total += Variance(row);
  }
  return total / friction.size();
}

double PerformanceSurface::FrictionAxisVariance() const {
  double total = 0.0;
  for (std::size_t k = 0; k < restitution.size(); ++k) {
    std::vector<double> col;
    for (std::size_t i = 0; i < friction.size(); ++i) {
      col.push_back(At(static_cast<int>(i), static_cast<int>(k)));
    }
    total += Variance(col);
  }
  return total / restitution.size();
}

void PerformanceSurface::Validate() const {
  if (friction.empty() || restitution.empty()) {
    throw std::invalid_argument("surface has an empty axis");
  }
  if (j.size() != friction.size() * restitution.size()) {
    throw std::invalid_argument("surface grid is incomplete");
  }
  for (std::size_t i = 1; i < friction.size(); ++i) {
    if (!(friction[i] > friction[i - 1])) {
      throw std::invalid_argument("friction axis must increase");
    }
  }
  for (std::size_t i = 1; i < restitution.size(); ++i) {
    if (!(restitution[i] > restitution[i - 1])) {
      throw std::invalid_argument("restitution axis must increase");
    }
  }
  for (double v : j) {
    if (!(v >= 0.0 && v <= 1.0)) {
      throw std::invalid_argument("surface value outside [0, 1]");
    }
  }
}

PerformanceSurface BuildPerformanceSurface(const SurfaceGrid& grid,
                                           const EnvironmentSpec& proxy_env,
                                           const std::vector<TaskSpec>& tasks,
                                           double density) {
  grid.Validate();
  proxy_env.Validate();
  if (tasks.empty()) throw std::invalid_argument("surface needs tasks");
  if (!(proxy_env.damping > 0.0)) {
    throw std::invalid_argument("proxy damping must be in (0, 1]");
  }
  PerformanceSurface s;
  s.friction = grid.FrictionAxis();
  s.restitution = grid.RestitutionAxis();
  s.proxy_damping = proxy_env.damping;
  s.density = density;
  const int nf = grid.friction_count;
  const int ne = grid.restitution_count;
  s.j.assign(static_cast<std::size_t>(nf) * ne, 0.0);
  std::vector<char> valid(s.j.size(), 1);

  SuccessOracle proxy(proxy_env);
  proxy.Precompute(tasks);
  for (int i = 0; i < nf; ++i) {
    for (int k = 0; k < ne; ++k) {
      const std::size_t cell = static_cast<std::size_t>(i) * ne + k;
      try {
        const LatentFactors theta{density, s.friction[i], s.restitution[k]};
        s.j[cell] = Auccess(TrainSimRanker(theta, tasks), tasks, proxy).auccess;
      } catch (const std::exception&) {
        valid[cell] = 0;
        s.invalid_cells.push_back(static_cast<int>(cell));
      }
    }
  }
  if (s.invalid_cells.size() == s.j.size()) {
    throw std::runtime_error("every surface cell failed");
  }
  // Fill failed cells with the mean of their valid 4-neighbours, widening
  // to all valid cells when none is adjacent.
  for (int cell : s.invalid_cells) {
    const int i = cell / ne;
    const int k = cell % ne;
    double sum = 0.0;
    int count = 0;
    const int di[] = {-1, 1, 0, 0};
    const int dk[] = {0, 0, -1, 1};
    for (int d = 0; d < 4; ++d) {
      const int ni = i + di[d];
      const int nk = k + dk[d];
      if (ni < 0 || ni >= nf || nk < 0 || nk >= ne) continue;
      if (!valid[ni * ne + nk]) continue;
      sum += s.j[ni * ne + nk];
      ++count;
    }
    if (count == 0) {
      for (std::size_t c = 0; c < s.j.size(); ++c) {
        if (valid[c]) {
          sum += s.j[c];
          ++count;
        }
      }
    }
    s.j[cell] = sum / count;
  }
  return s;
}

std::string SurfaceToText(const PerformanceSurface& surface) {
  nlohmann::json j;
  j["friction"] = surface.friction;
  j["restitution"] = surface.restitution;
  j["j"] = surface.j;
  j["proxy_damping"] = surface.proxy_damping;
  j["density"] = surface.density;
  j["invalid_cells"] = surface.invalid_cells;
  return j.dump() + "\n";
}

PerformanceSurface ParseSurface(const std::string& text) {
  PerformanceSurface s;
  try {
    const nlohmann::json j = nlohmann::json::parse(text);
    s.friction = j.at("friction").get<std::vector<double>>();
    s.restitution = j.at("restitution").get<std::vector<double>>();
    s.j = j.at("j").get<std::vector<double>>();
    s.proxy_damping = j.at("proxy_damping").get<double>();
    s.density = j.at("density").get<double>();
    if (j.contains("invalid_cells")) {
      s.invalid_cells = j.at("invalid_cells").get<std::vector<int>>();
    }
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(fmt::format("bad surface file: {}", e.what()));
  }
  s.Validate();
  return s;
}

ActionRanker BaselineDomainRandomization(std::uint64_t seed,
                                         const std::vector<TaskSpec>& tasks,
                                         int draws,
                                         const LatentBounds& bounds,
                                         const EnvironmentSpec& sim_env) {
  if (draws < 1) throw std::invalid_argument("draws must be positive");
  Rng rng = Substream(seed, "domain-randomization");
  std::vector<std::vector<double>> sum(tasks.size());
  for (std::size_t t = 0; t < tasks.size(); ++t) {
    sum[t].assign(tasks[t].action_count(), 0.0);
  }
  for (int d = 0; d < draws; ++d) {
    EnvironmentSpec env = sim_env;
    env.latents.density = UniformReal(rng, bounds.lower[0], bounds.upper[0]);
    env.latents.friction = UniformReal(rng, bounds.lower[1], bounds.upper[1]);
    env.latents.restitution =
        UniformReal(rng, bounds.lower[2], bounds.upper[2]);
    const auto table = ProgressTable(tasks, env);
    for (std::size_t t = 0; t < tasks.size(); ++t) {
      for (std::size_t a = 0; a < table[t].size(); ++a) {
        sum[t][a] += table[t][a];
      }
    }
  }
  ActionRanker ranker;
  for (std::size_t t = 0; t < tasks.size(); ++t) {
    for (double& v : sum[t]) v /= draws;
    ranker.tasks.push_back(RankByScore(tasks[t].id, std::move(sum[t])));
  }
  return ranker;
}

ActionRanker RandomOrderRanker(std::uint64_t seed,
                               const std::vector<TaskSpec>& tasks) {
  Rng rng = Substream(seed, "direct");
  ActionRanker ranker;
  for (const TaskSpec& task : tasks) {
    TaskRanking r;
    r.task_id = task.id;
    r.order.resize(task.action_count());
    std::iota(r.order.begin(), r.order.end(), 0);
    // Fisher-Yates with the portable index draw.
    for (int i = task.action_count() - 1; i > 0; --i) {
      std::swap(r.order[i], r.order[UniformIndex(rng, i + 1)]);
    }
    r.scores.assign(task.action_count(), 0.0);
    for (int k = 0; k < task.action_count(); ++k) {
      r.scores[r.order[k]] = static_cast<double>(task.action_count() - k);
    }
    ranker.tasks.push_back(std::move(r));
  }
  return ranker;
}

AuccessReport BaselineDirect(SuccessOracle& real,
                             const std::vector<TaskSpec>& tasks,
                             std::uint64_t seed) {
  return Auccess(RandomOrderRanker(seed, tasks), tasks, real);
}

}  // namespace simground
