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

#include "simground/tasks.h"

#include <cmath>
#include <set>
#include <stdexcept>

#include <gtest/gtest.h>

namespace simground {
namespace {

// Bowling trajectory whose only contacts are green-blue spells of the given
// lengths, separated by one step without contact.
Trajectory BowlingContacts(std::vector<int> spells) {
  Trajectory t;
  t.roles = {"floor", "ball-green", "ball-blue"};
  t.dynamic_bodies = {1, 2};
  t.contacts_recorded = true;
  int step = 0;
  for (int len : spells) {
    for (int i = 0; i < len; ++i) {
      t.contacts.push_back({step++, 1, 2, {1.0, 0.0}, 0.1, ContactKind::kNew});
    }
    ++step;
  }
  t.steps_simulated = step;
  return t;
}

TEST(TasksTest, SplitSizesMatchFamilyCounts) {
  EXPECT_EQ(BuildSplit(Family::kBasketball, Split::kTrain, Scale::kDesk).size(),
            15u);
  EXPECT_EQ(
      BuildSplit(Family::kBasketball, Split::kValidation, Scale::kDesk).size(),
      5u);
  EXPECT_EQ(BuildSplit(Family::kBasketball, Split::kTest, Scale::kDesk).size(),
            5u);
  EXPECT_EQ(BuildSplit(Family::kBowling, Split::kTrain, Scale::kDesk).size(),
            60u);
  EXPECT_EQ(
      BuildSplit(Family::kBowling, Split::kValidation, Scale::kDesk).size(),
      20u);
  EXPECT_EQ(BuildSplit(Family::kBowling, Split::kTest, Scale::kDesk).size(),
            20u);
}

TEST(TasksTest, SplitsFollowIdOrder) {
  EXPECT_EQ(BuildTask(Family::kBowling, 59, Scale::kPaper).split, Split::kTrain);
  EXPECT_EQ(BuildTask(Family::kBowling, 60, Scale::kPaper).split,
            Split::kValidation);
  EXPECT_EQ(BuildTask(Family::kBowling, 80, Scale::kPaper).split, Split::kTest);
  EXPECT_EQ(BuildTask(Family::kBowling, 99, Scale::kPaper).split, Split::kTest);
  EXPECT_EQ(BuildTask(Family::kBasketball, 0, Scale::kPaper).split,
            Split::kTrain);
  EXPECT_EQ(BuildTask(Family::kBasketball, 24, Scale::kPaper).split,
            Split::kTest);
}

TEST(TasksTest, OutOfRangeIdsThrow) {
  EXPECT_THROW(BuildTask(Family::kBowling, 100, Scale::kPaper),
               std::out_of_range);
  EXPECT_THROW(BuildTask(Family::kBasketball, 25, Scale::kDesk),
               std::out_of_range);
  EXPECT_THROW(BuildTask(Family::kBasketball, -1, Scale::kDesk),
               std::out_of_range);
}

TEST(TasksTest, BuildTaskIsPure) {
  for (Family f : {Family::kBasketball, Family::kBowling}) {
    for (int id : {0, 7, 19}) {
      const TaskSpec a = BuildTask(f, id, Scale::kDesk);
      const TaskSpec b = BuildTask(f, id, Scale::kDesk);
      EXPECT_EQ(a.variation, b.variation);
      EXPECT_EQ(a.scene.initial, b.scene.initial);
      ASSERT_EQ(a.scene.bodies.size(), b.scene.bodies.size());
    }
  }
}

TEST(TasksTest, TaskIdsGiveDistinctScenes) {
  for (Family f : {Family::kBasketball, Family::kBowling}) {
    std::set<std::vector<double>> seen;
    for (int id = 0; id < SizesFor(f).total(); ++id) {
      seen.insert(BuildTask(f, id, Scale::kDesk).variation);
    }
    EXPECT_EQ(static_cast<int>(seen.size()), SizesFor(f).total());
  }
}

TEST(TasksTest, ActionSpaceSizes) {
  EXPECT_EQ(ActionGridFor(Family::kBasketball, Scale::kPaper).size(), 40000);
  EXPECT_EQ(ActionGridFor(Family::kBowling, Scale::kPaper).size(), 50000);
  EXPECT_EQ(ActionGridFor(Family::kBasketball, Scale::kDesk).size(), 400);
  EXPECT_EQ(ActionGridFor(Family::kBowling, Scale::kDesk).size(), 500);
}

TEST(TasksTest, BasketballDecodeCorners) {
  const TaskSpec t = BuildTask(Family::kBasketball, 0, Scale::kPaper);
  const BasketballLayout& l = DefaultBasketballLayout();
  const Action first = DecodeAction(t, 0);
  EXPECT_DOUBLE_EQ(first.params[0], l.spawn_x_min);
  EXPECT_DOUBLE_EQ(first.params[1], l.plank_x_min);
  EXPECT_DOUBLE_EQ(first.params[2], l.plank_y_min);
  const Action last = DecodeAction(t, 39999);
  EXPECT_DOUBLE_EQ(last.params[0], l.spawn_x_max);
  EXPECT_DOUBLE_EQ(last.params[1], l.plank_x_max);
  EXPECT_DOUBLE_EQ(last.params[2], l.plank_y_max);
  // index = ball * 200 + plank.
  const Action second_ball = DecodeAction(t, 200);
  EXPECT_GT(second_ball.params[0], l.spawn_x_min);
  EXPECT_DOUBLE_EQ(second_ball.params[1], l.plank_x_min);
  EXPECT_DOUBLE_EQ(second_ball.params[2], l.plank_y_min);
  EXPECT_THROW(DecodeAction(t, 40000), std::out_of_range);
  EXPECT_THROW(DecodeAction(t, -1), std::out_of_range);
}

TEST(TasksTest, BowlingDecodeIsRowMajorXYRadius) {
  const TaskSpec t = BuildTask(Family::kBowling, 99, Scale::kPaper);
  const BowlingLayout& l = DefaultBowlingLayout();
  const Action a = DecodeAction(t, 50 * 20);
  EXPECT_DOUBLE_EQ(a.params[0],
                   l.red_x_min + (l.red_x_max - l.red_x_min) / 49.0);
  EXPECT_DOUBLE_EQ(a.params[1], l.red_height_min);
  EXPECT_DOUBLE_EQ(a.params[2], l.red_radius_min);
  const Action b = DecodeAction(t, 1);
  EXPECT_DOUBLE_EQ(b.params[0], l.red_x_min);
  EXPECT_DOUBLE_EQ(b.params[1], l.red_height_min);
  EXPECT_GT(b.params[2], l.red_radius_min);
}

TEST(TasksTest, DecodeEncodeRoundTripAndInjective) {
  for (Family f : {Family::kBasketball, Family::kBowling}) {
    const TaskSpec t = BuildTask(f, 1, Scale::kDesk);
    std::set<std::array<double, 3>> seen;
    for (int i = 0; i < t.action_count(); ++i) {
      const Action a = DecodeAction(t, i);
      EXPECT_EQ(a.index, i);
      EXPECT_EQ(EncodeAction(t, a.params), i);
      seen.insert(a.params);
    }
    EXPECT_EQ(static_cast<int>(seen.size()), t.action_count());
  }
}

TEST(TasksTest, EncodeRejectsOffGridParams) {
  const TaskSpec t = BuildTask(Family::kBowling, 1, Scale::kDesk);
  std::array<double, 3> p = DecodeAction(t, 3).params;
  p[0] += 1e-3;
  EXPECT_THROW(EncodeAction(t, p), std::invalid_argument);
}

TEST(TasksTest, BasketballPlankIsAt45Degrees) {
  const TaskSpec t = BuildTask(Family::kBasketball, 0, Scale::kDesk);
  const Scene s = SceneForAction(t, DecodeAction(t, 17));
  const int plank = s.Find("plank");
  ASSERT_GE(plank, 0);
  const auto& seg = std::get<SegmentShape>(s.bodies[plank].shape);
  const Vec2 d = seg.p2 - seg.p1;
  EXPECT_NEAR(std::abs(std::atan2(d.y, d.x)), M_PI / 4, 1e-12);
  EXPECT_FALSE(s.bodies[plank].material.has_value());
  EXPECT_FALSE(s.bodies[s.Find("ball-red")].material.has_value());
}

TEST(TasksTest, BowlingContactRunsMustBeContiguous) {
  const TaskSpec t = BuildTask(Family::kBowling, 0, Scale::kDesk);
  EXPECT_TRUE(GoalAchieved(t, BowlingContacts({800})));
  EXPECT_DOUBLE_EQ(ProgressScore(t, BowlingContacts({800})), 1.0);
  EXPECT_TRUE(GoalAchieved(t, BowlingContacts({720})));
  EXPECT_FALSE(GoalAchieved(t, BowlingContacts({719})));
  EXPECT_FALSE(GoalAchieved(t, BowlingContacts({400, 400})));
  EXPECT_DOUBLE_EQ(ProgressScore(t, BowlingContacts({400, 400})), 400.0 / 720);
  EXPECT_DOUBLE_EQ(ProgressScore(t, BowlingContacts({360})), 0.5);
  EXPECT_LT(ProgressScore(t, BowlingContacts({719})), 1.0);
}

TEST(TasksTest, BowlingGoalNeedsContactLog) {
  const TaskSpec t = BuildTask(Family::kBowling, 0, Scale::kDesk);
  Trajectory traj = BowlingContacts({10});
  traj.contacts_recorded = false;
  EXPECT_THROW(GoalAchieved(t, traj), std::invalid_argument);
}

TEST(TasksTest, BasketballProgressIsNegativeClosestApproach) {
  const TaskSpec t = BuildTask(Family::kBasketball, 0, Scale::kDesk);
  const Vec2 centre = (t.basket_min + t.basket_max) * 0.5;
  Trajectory traj;
  traj.roles = {"floor", "ball-red"};
  traj.dynamic_bodies = {1};
  for (double dy : {5.0, 2.0, 3.0}) {
    Frame f;
    f.states.resize(1);
    f.states[0].position = centre + Vec2{0.0, dy};
    traj.frames.push_back(f);
  }
  EXPECT_DOUBLE_EQ(ProgressScore(t, traj), -2.0);
  EXPECT_FALSE(GoalAchieved(t, traj));
  Frame inside;
  inside.states.resize(1);
  inside.states[0].position = centre;
  traj.frames.push_back(inside);
  EXPECT_DOUBLE_EQ(ProgressScore(t, traj), 1.0);
  EXPECT_TRUE(GoalAchieved(t, traj));
}

// Goal and progress agree, and the recomputed values match the online
// monitor, on real rollouts of both families.
TEST(TasksTest, GoalAndProgressAreCoherentOnRollouts) {
  for (Family f : {Family::kBasketball, Family::kBowling}) {
    const TaskSpec t = BuildTask(f, 2, Scale::kDesk);
    EnvironmentSpec env;
    env.latents = f == Family::kBasketball ? kBasketballTrueLatents
                                           : kBowlingTrueLatents;
    int solved = 0;
    for (int a = 0; a < t.action_count(); a += 7) {
      const TaskRun run = RunAction(t, DecodeAction(t, a), env, true);
      solved += run.outcome.solved;
      EXPECT_EQ(run.outcome.solved, run.outcome.progress == 1.0);
      EXPECT_EQ(GoalAchieved(t, run.trajectory), run.outcome.solved);
      EXPECT_DOUBLE_EQ(ProgressScore(t, run.trajectory), run.outcome.progress);
    }
    EXPECT_GT(solved, 0) << FamilyName(f);
  }
}

TEST(TasksTest, SceneBallsRestOnFloorAtStart) {
  const TaskSpec t = BuildTask(Family::kBowling, 4, Scale::kDesk);
  Scene scene = t.scene;
  EnvironmentSpec env;
  env.latents = kBowlingTrueLatents;
  const Trajectory traj = Rollout(scene, env, {240, 240, false, false});
  for (std::size_t b = 0; b < traj.frames.back().states.size(); ++b) {
    EXPECT_LT(Length(traj.frames.back().states[b].position -
                     traj.frames.front().states[b].position),
              0.02);
  }
}

TEST(TasksTest, NamesRoundTrip) {
  for (Family f : {Family::kBasketball, Family::kBowling}) {
    EXPECT_EQ(ParseFamily(FamilyName(f)), f);
  }
  for (Scale s : {Scale::kPaper, Scale::kDesk}) {
    EXPECT_EQ(ParseScale(ScaleName(s)), s);
  }
  for (Split s : {Split::kTrain, Split::kValidation, Split::kTest}) {
    EXPECT_EQ(ParseSplit(SplitName(s)), s);
  }
  EXPECT_THROW(ParseFamily("curling"), std::invalid_argument);
}

TEST(TasksTest, ManifestHasOneLinePerTask) {
  const auto tasks = BuildSplit(Family::kBasketball, Split::kTest, Scale::kDesk);
  const std::string m = TaskManifest(tasks);
  EXPECT_EQ(std::count(m.begin(), m.end(), '\n'), 5);
  EXPECT_NE(m.find("\"split\":\"test\""), std::string::npos);
}

}  // namespace
}  // namespace simground
