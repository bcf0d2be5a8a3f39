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

#include <filesystem>
#include <stdexcept>

#include <gtest/gtest.h>

#include "simground/tasks.h"

namespace simground {
namespace {

std::string TempPath(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() /
                   ::testing::UnitTest::GetInstance()->current_test_info()->name();
  std::filesystem::remove_all(dir);
  return (dir / name).string();
}

Trajectory SampleTrajectory() {
  const TaskSpec t = BuildTask(Family::kBowling, 1, Scale::kDesk);
  EnvironmentSpec env;
  env.latents = kBowlingTrueLatents;
  env.damping = 0.8;
  return RunAction(t, DecodeAction(t, 42), env).trajectory;
}

TEST(IoTest, DumpHasOneLinePerFrameAndBodyPlusSummary) {
  const Trajectory t = SampleTrajectory();
  const std::string text = TrajectoryDump(t);
  const auto lines = std::count(text.begin(), text.end(), '\n');
  EXPECT_EQ(static_cast<std::size_t>(lines),
            t.frames.size() * t.dynamic_bodies.size() + 1);
  EXPECT_NE(text.find("\"body_role\":\"ball-green\""), std::string::npos);
  EXPECT_NE(text.find("\"collision_count\""), std::string::npos);
}

TEST(IoTest, DumpRoundTripsToNineDigits) {
  const Trajectory t = SampleTrajectory();
  const Trajectory back = ParseTrajectoryDump(TrajectoryDump(t));
  ASSERT_EQ(back.frames.size(), t.frames.size());
  EXPECT_EQ(back.ball_collisions, t.ball_collisions);
  EXPECT_EQ(back.rolling_steps, t.rolling_steps);
  EXPECT_EQ(back.steps_simulated, t.steps_simulated);
  EXPECT_EQ(back.terminated, t.terminated);
  for (std::size_t f = 0; f < t.frames.size(); ++f) {
    EXPECT_EQ(back.frames[f].step, t.frames[f].step);
    for (std::size_t b = 0; b < t.frames[f].states.size(); ++b) {
      const BodyState& x = t.frames[f].states[b];
      const BodyState& y = back.frames[f].states[b];
      EXPECT_NEAR(y.position.x, x.position.x, 1e-8 * (1 + std::abs(x.position.x)));
      EXPECT_NEAR(y.velocity.y, x.velocity.y, 1e-8 * (1 + std::abs(x.velocity.y)));
    }
  }
  // Re-dumping the parsed trajectory is byte identical.
  EXPECT_EQ(TrajectoryDump(back), TrajectoryDump(t));
}

TEST(IoTest, ParseRejectsMalformedDumps) {
  EXPECT_THROW(ParseTrajectoryDump(""), std::invalid_argument);
  EXPECT_THROW(ParseTrajectoryDump("{\"step\":0}\n"), std::invalid_argument);
  EXPECT_THROW(ParseTrajectoryDump("not json\n"), std::invalid_argument);
}

TEST(IoTest, WriteFileRefusesOverwriteWithoutForce) {
  const std::string path = TempPath("a/b/out.txt");
  WriteFile(path, "one", false);
  EXPECT_EQ(ReadFile(path), "one");
  EXPECT_THROW(WriteFile(path, "two", false), std::runtime_error);
  EXPECT_EQ(ReadFile(path), "one");
  WriteFile(path, "two", true);
  EXPECT_EQ(ReadFile(path), "two");
}

TEST(IoTest, ReadMissingFileThrows) {
  EXPECT_THROW(ReadFile(TempPath("missing")), std::runtime_error);
}

}  // namespace
}  // namespace simground
