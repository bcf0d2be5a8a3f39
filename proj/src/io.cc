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

#include "simground/io.h"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

namespace simground {

std::string TrajectoryDump(const Trajectory& traj) {
  std::string out;
  for (const Frame& f : traj.frames) {
    for (std::size_t i = 0; i < f.states.size(); ++i) {
      const BodyState& s = f.states[i];
      const std::string& role = traj.roles.at(traj.dynamic_bodies.at(i));
      out += fmt::format(
          "{{\"step\":{},\"body_role\":\"{}\",\"x\":{:.9g},\"y\":{:.9g},"
          "\"vx\":{:.9g},\"vy\":{:.9g},\"angle\":{:.9g},\"omega\":{:.9g}}}\n",
          f.step, role, s.position.x, s.position.y, s.velocity.x,
          s.velocity.y, s.angle, s.angular_velocity);
    }
  }
  out += fmt::format(
      "{{\"collision_count\":{},\"rolling_steps\":[{}],\"terminated\":{},"
      "\"termination_step\":{},\"steps_simulated\":{}}}\n",
      traj.ball_collisions, fmt::join(traj.rolling_steps, ","),
      traj.terminated, traj.termination_step, traj.steps_simulated);
  return out;
}

Trajectory ParseTrajectoryDump(const std::string& text) {
  Trajectory traj;
  std::istringstream in(text);
  std::string line;
  bool summary = false;
  try {
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      if (summary) throw std::invalid_argument("record after summary");
      const nlohmann::json j = nlohmann::json::parse(line);
      if (j.contains("collision_count")) {
        traj.ball_collisions = j.at("collision_count").get<int>();
        traj.rolling_steps = j.at("rolling_steps").get<std::vector<int>>();
        traj.terminated = j.at("terminated").get<bool>();
        traj.termination_step = j.at("termination_step").get<int>();
        traj.steps_simulated = j.at("steps_simulated").get<int>();
        summary = true;
        continue;
      }
      const int step = j.at("step").get<int>();
      const std::string role = j.at("body_role").get<std::string>();
      if (traj.frames.empty() || traj.frames.back().step != step) {
        if (!traj.frames.empty() && traj.frames.back().step > step) {
          throw std::invalid_argument("frame steps must increase");
        }
        traj.frames.push_back(Frame{step, {}});
      }
      Frame& f = traj.frames.back();
      const std::size_t slot = f.states.size();
      if (traj.frames.size() == 1) {
        traj.roles.push_back(role);
        traj.dynamic_bodies.push_back(static_cast<int>(slot));
      } else if (slot >= traj.roles.size() || traj.roles[slot] != role) {
        throw std::invalid_argument("inconsistent body order");
      }
      BodyState s;
      s.position = {j.at("x").get<double>(), j.at("y").get<double>()};
      s.velocity = {j.at("vx").get<double>(), j.at("vy").get<double>()};
      s.angle = j.at("angle").get<double>();
      s.angular_velocity = j.at("omega").get<double>();
      f.states.push_back(s);
    }
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(fmt::format("bad trajectory dump: {}", e.what()));
  }
  if (!summary) throw std::invalid_argument("trajectory dump has no summary");
  return traj;
}

std::string ReadFile(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error(fmt::format("cannot read {}", path));
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

void WriteFile(const std::string& path, const std::string& content,
               bool force) {
  if (!force && std::filesystem::exists(path)) {
    throw std::runtime_error(
        fmt::format("{} exists; pass --force to overwrite", path));
  }
  const std::filesystem::path p(path);
  if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error(fmt::format("cannot write {}", path));
  out << content;
  if (!out) throw std::runtime_error(fmt::format("write to {} failed", path));
}

}  // namespace simground
