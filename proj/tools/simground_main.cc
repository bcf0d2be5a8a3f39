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

// Command-line front end: task generation, grounding, surfaces, transfer
// evaluation, reports and full experiment runs.

#include <algorithm>
#include <cstdint>
#include <exception>
#include <filesystem>
#include <iostream>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "simground/experiment.h"
#include "simground/exploration.h"
#include "simground/grounding.h"
#include "simground/io.h"
#include "simground/parallel.h"
#include "simground/tasks.h"
#include "simground/transfer.h"
#include "simground/workflow.h"

namespace simground {
namespace {

namespace fs = std::filesystem;
using Json = nlohmann::ordered_json;

constexpr int kUsageError = 2;
constexpr int kRuntimeError = 1;

// Collects artifacts of one command and writes the manifest last.
class Output {
 public:
  Output(std::string dir, bool force, Json config)
      : dir_(std::move(dir)), force_(force), config_(std::move(config)) {}

  const Json& config() const { return config_; }

  void Write(const std::string& name, const std::string& content) {
    WriteFile((fs::path(dir_) / name).string(), content, force_);
    files_.push_back(name);
  }

  // JSON lines prefixed with a config header line.
  void WriteLines(const std::string& name, const std::string& lines) {
    Write(name, Json{{"config", config_}}.dump() + "\n" + lines);
  }

  void WriteJson(const std::string& name, Json body) {
    Json j;
    j["config"] = config_;
    for (auto& [k, v] : body.items()) j[k] = v;
    Write(name, j.dump(2) + "\n");
  }

  void Finish() {
    Json manifest;
    manifest["config"] = config_;
    manifest["artifacts"] = files_;
    WriteFile((fs::path(dir_) / "manifest.json").string(),
              manifest.dump(2) + "\n", force_);
  }

 private:
  std::string dir_;
  bool force_;
  Json config_;
  std::vector<std::string> files_;
};

const std::map<std::string, Family> kFamilies{
    {"basketball", Family::kBasketball}, {"bowling", Family::kBowling}};
const std::map<std::string, Scale> kScales{{"desk", Scale::kDesk},
                                           {"paper", Scale::kPaper}};
const std::map<std::string, Split> kSplits{{"train", Split::kTrain},
                                           {"validation", Split::kValidation},
                                           {"test", Split::kTest}};

EnvironmentSpec RealEnvFor(Family family, double damping) {
  EnvironmentSpec env;
  env.latents = family == Family::kBasketball ? kBasketballTrueLatents
                                              : kBowlingTrueLatents;
  env.damping = damping;
  return env;
}

LatentFactors ReadTheta(const std::string& path) {
  try {
    const auto j = nlohmann::json::parse(ReadFile(path));
    LatentFactors t{j.at("density").get<double>(),
                    j.at("friction").get<double>(),
                    j.at("restitution").get<double>()};
    t.Validate();
    return t;
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(fmt::format("bad theta file {}: {}", path,
                                            e.what()));
  }
}

Json ThetaJson(const LatentFactors& t) {
  return Json{{"density", t.density},
              {"friction", t.friction},
              {"restitution", t.restitution}};
}

struct Common {
  Family family = Family::kBowling;
  Scale scale = Scale::kDesk;
  std::string out;
  bool force = false;
};

void AddCommon(CLI::App* cmd, Common& c) {
  cmd->add_option("--family", c.family, "basketball or bowling")
      ->required()
      ->transform(CLI::CheckedTransformer(kFamilies, CLI::ignore_case));
  cmd->add_option("--scale", c.scale, "desk or paper")
      ->transform(CLI::CheckedTransformer(kScales, CLI::ignore_case));
  cmd->add_option("--out", c.out, "output directory")->required();
  cmd->add_flag("--force", c.force, "overwrite existing files");
}

Json CommonJson(const std::string& command, const Common& c) {
  return Json{{"command", command},
              {"family", FamilyName(c.family)},
              {"scale", ScaleName(c.scale)}};
}

// gen-tasks ---------------------------------------------------------------

struct GenTasksArgs {
  Common common;
};

void GenTasks(const GenTasksArgs& a) {
  Output out(a.common.out, a.common.force, CommonJson("gen-tasks", a.common));
  std::vector<TaskSpec> all;
  for (Split s : {Split::kTrain, Split::kValidation, Split::kTest}) {
    for (TaskSpec& t : BuildSplit(a.common.family, s, a.common.scale)) {
      all.push_back(std::move(t));
    }
  }
  out.WriteLines("tasks.jsonl", TaskManifest(all));
  out.Finish();
}

// iplw ----------------------------------------------------------------------

struct IplwArgs {
  Common common;
  std::string strategy = "mixed";
  std::string surface;
  int rounds = 10;
  int actions_per_round = 50;
  int candidate_pool = kDefaultCandidatePool;
  double min_residual = 1e-3;
  std::uint64_t seed = 0;
  double real_damping = 0.8;
  double sim_damping = 1.0;
  int cem_rounds = 0;
  int cem_samples = 0;
  int cem_elites = 0;
};

void Iplw(const IplwArgs& a) {
  IplwConfig cfg;
  cfg.strategy.kind = ParseStrategy(a.strategy);
  cfg.strategy.seed = a.seed;
  if (!a.surface.empty()) {
    cfg.strategy.surface = std::make_shared<const PerformanceSurface>(
        ParseSurface(ReadFile(a.surface)));
  }
  cfg.actions_per_round = a.actions_per_round;
  cfg.max_rounds = a.rounds;
  cfg.candidate_pool = a.candidate_pool;
  cfg.min_residual = a.min_residual;
  cfg.cem = DefaultCemConfig(a.common.family);
  if (a.cem_rounds > 0) cfg.cem.rounds = a.cem_rounds;
  if (a.cem_samples > 0) cfg.cem.samples_per_round = a.cem_samples;
  if (a.cem_elites > 0) cfg.cem.elite_count = a.cem_elites;
  cfg.real_env = RealEnvFor(a.common.family, a.real_damping);
  cfg.sim_env.damping = a.sim_damping;
  cfg.seed = a.seed;
  cfg.Validate();

  Json config = CommonJson("iplw", a.common);
  config["strategy"] = a.strategy;
  config["surface"] = a.surface;
  config["rounds"] = a.rounds;
  config["actions_per_round"] = a.actions_per_round;
  config["candidate_pool"] = a.candidate_pool;
  config["min_residual"] = a.min_residual;
  config["seed"] = a.seed;
  config["real_damping"] = a.real_damping;
  config["sim_damping"] = a.sim_damping;
  config["cem"] = Json{{"rounds", cfg.cem.rounds},
                       {"samples", cfg.cem.samples_per_round},
                       {"elites", cfg.cem.elite_count}};
  Output out(a.common.out, a.common.force, config);

  const IplwResult r = RunIplw(
      BuildSplit(a.common.family, Split::kTrain, a.common.scale), cfg);
  out.WriteLines("iplw.jsonl", IplwLogText(r.log));
  out.WriteJson("theta.json", ThetaJson(r.theta));
  out.Finish();
  std::cout << fmt::format("theta density={:.6g} friction={:.6g} "
                           "restitution={:.6g} real_interactions={}\n",
                           r.theta.density, r.theta.friction,
                           r.theta.restitution, r.log.real_interactions);
}

// surface -------------------------------------------------------------------

struct SurfaceArgs {
  Common common;
  double proxy_damping = 0.7;
  double density = 1.0;
  bool density_set = false;
  Split split = Split::kValidation;
  SurfaceGrid grid;
};

void Surface(const SurfaceArgs& a) {
  EnvironmentSpec proxy = RealEnvFor(a.common.family, a.proxy_damping);
  const double density = a.density_set ? a.density : proxy.latents.density;
  Json config = CommonJson("surface", a.common);
  config["proxy_damping"] = a.proxy_damping;
  config["density"] = density;
  config["split"] = SplitName(a.split);
  config["grid"] = Json{{"friction", {a.grid.friction_min, a.grid.friction_max,
                                      a.grid.friction_count}},
                        {"restitution",
                         {a.grid.restitution_min, a.grid.restitution_max,
                          a.grid.restitution_count}}};
  Output out(a.common.out, a.common.force, config);
  const std::vector<TaskSpec> tasks =
      BuildSplit(a.common.family, a.split, a.common.scale);
  if (tasks.empty()) throw std::invalid_argument("empty task split");
  const PerformanceSurface s =
      BuildPerformanceSurface(a.grid, proxy, tasks, density);
  out.Write("surface.json", SurfaceToText(s));
  out.Finish();
  std::cout << fmt::format(
      "restitution-axis variance {:.6g}, friction-axis variance {:.6g}\n",
      s.RestitutionAxisVariance(), s.FrictionAxisVariance());
}

// transfer ------------------------------------------------------------------

struct TransferArgs {
  Common common;
  std::string ranker = "theta";
  std::string theta;
  std::uint64_t seed = 0;
  double real_damping = 0.8;
  double sim_damping = 1.0;
  int draws = kDomainRandomizationDraws;
};

void Transfer(const TransferArgs& a) {
  Json config = CommonJson("transfer", a.common);
  config["ranker"] = a.ranker;
  config["theta"] = a.theta;
  config["seed"] = a.seed;
  config["real_damping"] = a.real_damping;
  config["sim_damping"] = a.sim_damping;
  config["draws"] = a.draws;
  const std::vector<TaskSpec> tasks =
      BuildSplit(a.common.family, Split::kTest, a.common.scale);
  const EnvironmentSpec real_env = RealEnvFor(a.common.family, a.real_damping);
  EnvironmentSpec sim_env;
  sim_env.damping = a.sim_damping;

  AuccessReport report;
  if (a.ranker == "theta") {
    if (a.theta.empty()) {
      throw std::invalid_argument("--ranker theta needs --theta");
    }
    const LatentFactors theta = ReadTheta(a.theta);
    Output out(a.common.out, a.common.force, config);
    report = Auccess(TrainSimRanker(theta, tasks, sim_env), real_env, tasks);
    out.WriteLines("auccess.jsonl", AuccessReportText(report));
    out.Finish();
  } else {
    Output out(a.common.out, a.common.force, config);
    if (a.ranker == "true") {
      report = Auccess(TrainSimRanker(real_env.latents, tasks, sim_env),
                       real_env, tasks);
    } else if (a.ranker == "dr") {
      report = Auccess(BaselineDomainRandomization(a.seed, tasks, a.draws,
                                                   LatentBounds{}, sim_env),
                       real_env, tasks);
    } else {
      SuccessOracle real(real_env);
      report = BaselineDirect(real, tasks, a.seed);
    }
    out.WriteLines("auccess.jsonl", AuccessReportText(report));
    out.Finish();
  }
  std::cout << fmt::format("auccess {:.6f}\n", report.auccess);
}

// report --------------------------------------------------------------------

struct ReportArgs {
  std::vector<std::string> runs;
  std::string out;
  bool force = false;
};

// Reads <run>/<strategy>/seed-*/auccess.jsonl below every run directory and
// writes a strategy comparison table.
void Report(const ReportArgs& a) {
  std::map<std::string, std::vector<std::pair<std::uint64_t, double>>> table;
  for (const std::string& run : a.runs) {
    if (!fs::is_directory(run)) {
      throw std::invalid_argument(fmt::format("{} is not a directory", run));
    }
    for (const auto& strategy : fs::directory_iterator(run)) {
      if (!strategy.is_directory()) continue;
      for (const auto& seed_dir : fs::directory_iterator(strategy.path())) {
        const fs::path file = seed_dir.path() / "auccess.jsonl";
        const std::string name = seed_dir.path().filename().string();
        if (!fs::is_regular_file(file) || !name.starts_with("seed-")) continue;
        const std::string text = ReadFile(file.string());
        const std::size_t last = text.rfind('{');
        const auto summary = nlohmann::json::parse(text.substr(last));
        table[strategy.path().filename().string()].emplace_back(
            std::stoull(name.substr(5)), summary.at("auccess").get<double>());
      }
    }
  }
  if (table.empty()) throw std::invalid_argument("no runs found");
  Json config{{"command", "report"}, {"runs", a.runs}};
  Output out(a.out, a.force, config);
  std::string csv = fmt::format("# config: {}\nstrategy,mean,stderr,seeds\n",
                                config.dump());
  std::string per_seed = fmt::format("# config: {}\nstrategy,seed,auccess\n",
                                     config.dump());
  for (auto& [strategy, rows] : table) {
    std::sort(rows.begin(), rows.end());
    std::vector<double> values;
    for (const auto& [seed, v] : rows) {
      values.push_back(v);
      per_seed += fmt::format("{},{},{:.9g}\n", strategy, seed, v);
    }
    const MeanStderr s = Summarize(values);
    csv += fmt::format("{},{:.9g},{:.9g},{}\n", strategy, s.mean, s.std_error,
                       s.n);
    std::cout << fmt::format("{:<12} {:.4f} +/- {:.4f} (n={})\n", strategy,
                             s.mean, s.std_error, s.n);
  }
  out.Write("comparison.csv", csv);
  out.Write("per_seed.csv", per_seed);
  out.Finish();
}

// run -----------------------------------------------------------------------

struct RunArgs {
  std::string config;
  std::string out;
  bool force = false;
};

void Run(const RunArgs& a) {
  ExperimentConfig cfg = ParseExperimentConfig(ReadFile(a.config));
  if (!a.out.empty()) cfg.out_dir = a.out;
  if (cfg.out_dir.empty()) throw std::invalid_argument("no output directory");
  cfg.Validate();
  const ExperimentResult r = RunExperiment(cfg, nullptr, a.force);
  for (const StrategySummary& s : r.summary) {
    std::cout << fmt::format("{:<12} {:.4f} +/- {:.4f} (n={})\n",
                             StrategyName(s.strategy), s.jump_start.mean,
                             s.jump_start.std_error, s.jump_start.n);
  }
}

int Main(int argc, char** argv) {
  CLI::App app{fmt::format(
      "Grounded-simulation experiments. Worker threads: ${} (default 1).",
      kWorkersEnv)};
  app.require_subcommand(1);

  GenTasksArgs gen;
  CLI::App* gen_cmd = app.add_subcommand("gen-tasks", "write the task manifest");
  AddCommon(gen_cmd, gen.common);

  IplwArgs iplw;
  CLI::App* iplw_cmd = app.add_subcommand("iplw", "ground latents with IPLW");
  AddCommon(iplw_cmd, iplw.common);
  iplw_cmd->add_option("--strategy", iplw.strategy,
                       "collisions|rolling|random|mixed|gradient");
  iplw_cmd->add_option("--surface", iplw.surface, "surface file for gradient")
      ->check(CLI::ExistingFile);
  iplw_cmd->add_option("--rounds", iplw.rounds);
  iplw_cmd->add_option("--actions-per-round", iplw.actions_per_round);
  iplw_cmd->add_option("--candidate-pool", iplw.candidate_pool);
  iplw_cmd->add_option("--min-residual", iplw.min_residual);
  iplw_cmd->add_option("--seed", iplw.seed);
  iplw_cmd->add_option("--real-damping", iplw.real_damping);
  iplw_cmd->add_option("--sim-damping", iplw.sim_damping);
  iplw_cmd->add_option("--cem-rounds", iplw.cem_rounds);
  iplw_cmd->add_option("--cem-samples", iplw.cem_samples);
  iplw_cmd->add_option("--cem-elites", iplw.cem_elites);

  SurfaceArgs surf;
  CLI::App* surf_cmd =
      app.add_subcommand("surface", "build a jump-start performance surface");
  AddCommon(surf_cmd, surf.common);
  surf_cmd->add_option("--proxy-damping", surf.proxy_damping);
  surf_cmd->add_option("--density", surf.density)
      ->each([&](const std::string&) { surf.density_set = true; });
  surf_cmd->add_option("--split", surf.split)
      ->transform(CLI::CheckedTransformer(kSplits, CLI::ignore_case));
  surf_cmd->add_option("--friction-min", surf.grid.friction_min);
  surf_cmd->add_option("--friction-max", surf.grid.friction_max);
  surf_cmd->add_option("--friction-count", surf.grid.friction_count);
  surf_cmd->add_option("--restitution-min", surf.grid.restitution_min);
  surf_cmd->add_option("--restitution-max", surf.grid.restitution_max);
  surf_cmd->add_option("--restitution-count", surf.grid.restitution_count);

  TransferArgs transfer;
  CLI::App* transfer_cmd =
      app.add_subcommand("transfer", "jump-start AUCCESS of a ranker");
  AddCommon(transfer_cmd, transfer.common);
  transfer_cmd->add_option("--ranker", transfer.ranker)
      ->check(CLI::IsMember({"theta", "true", "dr", "direct"}));
  transfer_cmd->add_option("--theta", transfer.theta, "theta.json from iplw")
      ->check(CLI::ExistingFile);
  transfer_cmd->add_option("--seed", transfer.seed);
  transfer_cmd->add_option("--real-damping", transfer.real_damping);
  transfer_cmd->add_option("--sim-damping", transfer.sim_damping);
  transfer_cmd->add_option("--draws", transfer.draws);

  ReportArgs report;
  CLI::App* report_cmd =
      app.add_subcommand("report", "compare strategies across run directories");
  report_cmd->add_option("runs", report.runs, "run directories")->required();
  report_cmd->add_option("--out", report.out)->required();
  report_cmd->add_flag("--force", report.force);

  RunArgs run;
  CLI::App* run_cmd = app.add_subcommand("run", "run an experiment config");
  run_cmd->add_option("--config", run.config, "INI experiment config")
      ->required()
      ->check(CLI::ExistingFile);
  run_cmd->add_option("--out", run.out, "overrides the config out key");
  run_cmd->add_flag("--force", run.force);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kUsageError;
  }

  try {
    if (gen_cmd->parsed()) GenTasks(gen);
    if (iplw_cmd->parsed()) Iplw(iplw);
    if (surf_cmd->parsed()) Surface(surf);
    if (transfer_cmd->parsed()) Transfer(transfer);
    if (report_cmd->parsed()) Report(report);
    if (run_cmd->parsed()) Run(run);
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsageError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kRuntimeError;
  }
  return 0;
}

}  // namespace
}  // namespace simground

int main(int argc, char** argv) { return simground::Main(argc, argv); }
