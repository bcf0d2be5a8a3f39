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

#include "simground/experiment.h"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <memory>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include <boost/algorithm/string.hpp>
#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "simground/io.h"

namespace simground {
namespace {

namespace pt = boost::property_tree;

const std::vector<std::pair<std::string, std::vector<std::string>>>&
KnownKeys() {
  static const std::vector<std::pair<std::string, std::vector<std::string>>>
      keys = {
          {"experiment", {"family", "scale", "strategies", "seeds", "out"}},
          {"environment", {"real_damping", "sim_damping"}},
          {"iplw",
           {"rounds", "actions_per_round", "candidate_pool", "min_residual",
            "surface"}},
          {"cem",
           {"rounds", "samples", "elites", "mean", "stddev", "lower",
            "upper"}},
      };
  return keys;
}

std::vector<std::string> SplitList(const std::string& text) {
  std::vector<std::string> parts;
  boost::split(parts, text, boost::is_any_of(","));
  for (std::string& p : parts) boost::trim(p);
  std::erase_if(parts, [](const std::string& p) { return p.empty(); });
  return parts;
}

LatentVector ParseVector(const std::string& key, const std::string& text) {
  const std::vector<std::string> parts = SplitList(text);
  if (parts.size() != 3) {
    throw std::invalid_argument(fmt::format("{} needs three values", key));
  }
  LatentVector v{};
  for (int d = 0; d < 3; ++d) v[d] = std::stod(parts[d]);
  return v;
}

// Strict numeric parsing: the whole value must be consumed.
template <typename T>
void ReadNumber(const pt::ptree& tree, const std::string& key, T& field) {
  const auto raw = tree.get_optional<std::string>(key);
  if (!raw) return;
  const std::string text = boost::trim_copy(*raw);
  std::size_t used = 0;
  T value{};
  try {
    if constexpr (std::is_same_v<T, int>) {
      value = std::stoi(text, &used);
    } else if constexpr (std::is_same_v<T, std::uint64_t>) {
      value = std::stoull(text, &used);
    } else {
      value = std::stod(text, &used);
    }
  } catch (const std::logic_error&) {
    used = 0;
  }
  if (text.empty() || used != text.size()) {
    throw std::invalid_argument(
        fmt::format("bad value '{}' for {}", *raw, key));
  }
  field = value;
}

std::string VectorText(const LatentVector& v) {
  return fmt::format("{:.9g},{:.9g},{:.9g}", v[0], v[1], v[2]);
}

std::string StrategiesText(const std::vector<StrategyKind>& kinds) {
  std::vector<std::string_view> names;
  for (StrategyKind k : kinds) names.push_back(StrategyName(k));
  return fmt::format("{}", fmt::join(names, ","));
}

std::string RunDir(const ExperimentConfig& cfg, StrategyKind kind,
                   std::uint64_t seed) {
  return (std::filesystem::path(cfg.out_dir) / std::string(StrategyName(kind)) /
          fmt::format("seed-{}", seed))
      .string();
}

std::string Header(const ExperimentConfig& cfg, std::uint64_t seed,
                   StrategyKind kind) {
  return fmt::format("{{\"config\":{},\"seed\":{},\"strategy\":\"{}\"}}\n",
                     ExperimentConfigJson(cfg), seed, StrategyName(kind));
}

}  // namespace

void ExperimentConfig::Validate() const {
  if (strategies.empty()) throw std::invalid_argument("no strategies");
  if (seeds.empty()) throw std::invalid_argument("no seeds");
  if (!(real_damping > 0.0 && real_damping <= 1.0) ||
      !(sim_damping > 0.0 && sim_damping <= 1.0)) {
    throw std::invalid_argument("damping must lie in (0, 1]");
  }
  if (rounds <= 0 || actions_per_round <= 0 ||
      candidate_pool < actions_per_round || !(min_residual > 0.0)) {
    throw std::invalid_argument("bad IPLW parameters");
  }
  cem.Validate();
  const bool gradient =
      std::find(strategies.begin(), strategies.end(), StrategyKind::kGradient) !=
      strategies.end();
  if (gradient && (surface_path.empty() ||
                   !std::filesystem::is_regular_file(surface_path))) {
    throw std::invalid_argument(fmt::format(
        "gradient strategy needs an existing surface file, got '{}'",
        surface_path));
  }
}

EnvironmentSpec ExperimentConfig::RealEnv() const {
  EnvironmentSpec env;
  env.latents = family == Family::kBasketball ? kBasketballTrueLatents
                                              : kBowlingTrueLatents;
  env.damping = real_damping;
  return env;
}

EnvironmentSpec ExperimentConfig::SimEnv() const {
  EnvironmentSpec env;
  env.damping = sim_damping;
  return env;
}

ExperimentConfig DefaultExperimentConfig(Family family) {
  ExperimentConfig cfg;
  cfg.family = family;
  cfg.cem = DefaultCemConfig(family);
  return cfg;
}

ExperimentConfig ParseExperimentConfig(const std::string& text) {
  pt::ptree tree;
  try {
    std::istringstream in(text);
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw std::invalid_argument(fmt::format("bad config: {}", e.what()));
  }
  for (const auto& [section, body] : tree) {
    const auto known = std::find_if(
        KnownKeys().begin(), KnownKeys().end(),
        [&](const auto& entry) { return entry.first == section; });
    if (known == KnownKeys().end()) {
      throw std::invalid_argument(fmt::format("unknown section [{}]", section));
    }
    for (const auto& [key, value] : body) {
      if (std::find(known->second.begin(), known->second.end(), key) ==
          known->second.end()) {
        throw std::invalid_argument(
            fmt::format("unknown key '{}' in [{}]", key, section));
      }
    }
  }

  const Family family =
      ParseFamily(tree.get<std::string>("experiment.family", "bowling"));
  ExperimentConfig cfg = DefaultExperimentConfig(family);
  try {
    cfg.scale = ParseScale(tree.get<std::string>("experiment.scale", "desk"));
    if (auto s = tree.get_optional<std::string>("experiment.strategies")) {
      cfg.strategies.clear();
      for (const std::string& name : SplitList(*s)) {
        cfg.strategies.push_back(ParseStrategy(name));
      }
    }
    if (auto s = tree.get_optional<std::string>("experiment.seeds")) {
      cfg.seeds.clear();
      for (const std::string& v : SplitList(*s)) {
        cfg.seeds.push_back(std::stoull(v));
      }
    }
    cfg.out_dir = tree.get<std::string>("experiment.out", cfg.out_dir);
    ReadNumber(tree, "environment.real_damping", cfg.real_damping);
    ReadNumber(tree, "environment.sim_damping", cfg.sim_damping);
    ReadNumber(tree, "iplw.rounds", cfg.rounds);
    ReadNumber(tree, "iplw.actions_per_round", cfg.actions_per_round);
    ReadNumber(tree, "iplw.candidate_pool", cfg.candidate_pool);
    ReadNumber(tree, "iplw.min_residual", cfg.min_residual);
    cfg.surface_path = tree.get<std::string>("iplw.surface", cfg.surface_path);
    ReadNumber(tree, "cem.rounds", cfg.cem.rounds);
    ReadNumber(tree, "cem.samples", cfg.cem.samples_per_round);
    ReadNumber(tree, "cem.elites", cfg.cem.elite_count);
    for (auto [key, field] :
         {std::pair{"cem.mean", &cfg.cem.mean},
          std::pair{"cem.stddev", &cfg.cem.stddev},
          std::pair{"cem.lower", &cfg.cem.lower},
          std::pair{"cem.upper", &cfg.cem.upper}}) {
      if (auto s = tree.get_optional<std::string>(key)) {
        *field = ParseVector(key, *s);
      }
    }
  } catch (const pt::ptree_bad_data& e) {
    throw std::invalid_argument(fmt::format("bad config value: {}", e.what()));
  } catch (const std::logic_error& e) {
    // std::stod and friends.
    throw std::invalid_argument(fmt::format("bad config value: {}", e.what()));
  }
  return cfg;
}

std::string ExperimentConfigText(const ExperimentConfig& cfg) {
  std::string out;
  out += "[experiment]\n";
  out += fmt::format("family = {}\n", FamilyName(cfg.family));
  out += fmt::format("scale = {}\n", ScaleName(cfg.scale));
  out += fmt::format("strategies = {}\n", StrategiesText(cfg.strategies));
  out += fmt::format("seeds = {}\n", fmt::join(cfg.seeds, ","));
  if (!cfg.out_dir.empty()) out += fmt::format("out = {}\n", cfg.out_dir);
  out += "\n[environment]\n";
  out += fmt::format("real_damping = {:.9g}\n", cfg.real_damping);
  out += fmt::format("sim_damping = {:.9g}\n", cfg.sim_damping);
  out += "\n[iplw]\n";
  out += fmt::format("rounds = {}\n", cfg.rounds);
  out += fmt::format("actions_per_round = {}\n", cfg.actions_per_round);
  out += fmt::format("candidate_pool = {}\n", cfg.candidate_pool);
  out += fmt::format("min_residual = {:.9g}\n", cfg.min_residual);
  if (!cfg.surface_path.empty()) {
    out += fmt::format("surface = {}\n", cfg.surface_path);
  }
  out += "\n[cem]\n";
  out += fmt::format("rounds = {}\n", cfg.cem.rounds);
  out += fmt::format("samples = {}\n", cfg.cem.samples_per_round);
  out += fmt::format("elites = {}\n", cfg.cem.elite_count);
  out += fmt::format("mean = {}\n", VectorText(cfg.cem.mean));
  out += fmt::format("stddev = {}\n", VectorText(cfg.cem.stddev));
  out += fmt::format("lower = {}\n", VectorText(cfg.cem.lower));
  out += fmt::format("upper = {}\n", VectorText(cfg.cem.upper));
  return out;
}

std::string ExperimentConfigJson(const ExperimentConfig& cfg) {
  nlohmann::ordered_json j;
  j["family"] = FamilyName(cfg.family);
  j["scale"] = ScaleName(cfg.scale);
  j["strategies"] = StrategiesText(cfg.strategies);
  j["seeds"] = cfg.seeds;
  j["real_damping"] = cfg.real_damping;
  j["sim_damping"] = cfg.sim_damping;
  j["rounds"] = cfg.rounds;
  j["actions_per_round"] = cfg.actions_per_round;
  j["candidate_pool"] = cfg.candidate_pool;
  j["min_residual"] = cfg.min_residual;
  j["surface"] = cfg.surface_path;
  j["cem"] = {{"rounds", cfg.cem.rounds},
              {"samples", cfg.cem.samples_per_round},
              {"elites", cfg.cem.elite_count},
              {"mean", cfg.cem.mean},
              {"stddev", cfg.cem.stddev},
              {"lower", cfg.cem.lower},
              {"upper", cfg.cem.upper}};
  return j.dump();
}

MeanStderr Summarize(std::span<const double> values) {
  MeanStderr s;
  s.n = static_cast<int>(values.size());
  if (s.n == 0) return s;
  s.mean = std::accumulate(values.begin(), values.end(), 0.0) / s.n;
  if (s.n > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - s.mean) * (v - s.mean);
    s.std_error = std::sqrt(ss / (s.n - 1)) / std::sqrt(s.n);
  }
  return s;
}

ExperimentResult RunExperiment(const ExperimentConfig& cfg,
                               SuccessOracle* real, bool force) {
  cfg.Validate();
  const std::vector<TaskSpec> train =
      BuildSplit(cfg.family, Split::kTrain, cfg.scale);
  const std::vector<TaskSpec> test =
      BuildSplit(cfg.family, Split::kTest, cfg.scale);
  if (train.empty() || test.empty()) {
    throw std::invalid_argument("empty task split");
  }
  std::shared_ptr<const PerformanceSurface> surface;
  if (!cfg.surface_path.empty()) {
    surface = std::make_shared<const PerformanceSurface>(
        ParseSurface(ReadFile(cfg.surface_path)));
  }
  const EnvironmentSpec real_env = cfg.RealEnv();
  SuccessOracle own(real_env);
  if (real == nullptr) real = &own;
  if (!(real->env().latents == real_env.latents) ||
      real->env().damping != real_env.damping) {
    throw std::invalid_argument("shared oracle uses a different environment");
  }

  const bool write = !cfg.out_dir.empty();
  std::vector<std::string> artifacts;
  auto emit = [&](const std::string& path, const std::string& content) {
    WriteFile(path, content, force);
    artifacts.push_back(
        std::filesystem::relative(path, cfg.out_dir).generic_string());
  };

  ExperimentResult result;
  for (StrategyKind kind : cfg.strategies) {
    std::vector<double> scores;
    for (std::uint64_t seed : cfg.seeds) {
      IplwConfig icfg;
      icfg.strategy.kind = kind;
      icfg.strategy.seed = seed;
      if (kind == StrategyKind::kGradient) icfg.strategy.surface = surface;
      icfg.actions_per_round = cfg.actions_per_round;
      icfg.max_rounds = cfg.rounds;
      icfg.min_residual = cfg.min_residual;
      icfg.candidate_pool = cfg.candidate_pool;
      icfg.cem = cfg.cem;
      icfg.real_env = real_env;
      icfg.sim_env = cfg.SimEnv();
      icfg.seed = seed;

      SeedRun run;
      run.strategy = kind;
      run.seed = seed;
      run.iplw = RunIplw(train, icfg);
      const ActionRanker ranker =
          TrainSimRanker(run.iplw.theta, test, cfg.SimEnv());
      run.report = Auccess(ranker, test, *real);
      scores.push_back(run.report.auccess);

      if (write) {
        const std::string dir = RunDir(cfg, kind, seed);
        const std::string header = Header(cfg, seed, kind);
        emit(dir + "/iplw.jsonl", header + IplwLogText(run.iplw.log));
        emit(dir + "/auccess.jsonl", header + AuccessReportText(run.report));
        nlohmann::ordered_json theta;
        theta["config"] = nlohmann::json::parse(ExperimentConfigJson(cfg));
        theta["seed"] = seed;
        theta["strategy"] = StrategyName(kind);
        theta["density"] = run.iplw.theta.density;
        theta["friction"] = run.iplw.theta.friction;
        theta["restitution"] = run.iplw.theta.restitution;
        emit(dir + "/theta.json", theta.dump(2) + "\n");
      }
      result.runs.push_back(std::move(run));
    }
    result.summary.push_back({kind, Summarize(scores)});
  }

  if (write) {
    const std::filesystem::path out(cfg.out_dir);
    emit((out / "summary.csv").string(), SummaryCsv(result, cfg));
    nlohmann::ordered_json manifest;
    manifest["config"] = nlohmann::json::parse(ExperimentConfigJson(cfg));
    manifest["artifacts"] = artifacts;
    WriteFile((out / "manifest.json").string(), manifest.dump(2) + "\n",
              force);
  }
  return result;
}

std::string SummaryCsv(const ExperimentResult& result,
                       const ExperimentConfig& cfg) {
  std::string out = fmt::format("# config: {}\n", ExperimentConfigJson(cfg));
  out += "strategy,mean,stderr,seeds\n";
  for (const StrategySummary& s : result.summary) {
    out += fmt::format("{},{:.9g},{:.9g},{}\n", StrategyName(s.strategy),
                       s.jump_start.mean, s.jump_start.std_error,
                       s.jump_start.n);
  }
  return out;
}

}  // namespace simground
