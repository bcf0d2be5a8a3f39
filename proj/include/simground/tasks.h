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

// Basketball and Bowling task families: scene builders, discretised action
// spaces, goal predicates and progress scores.

#ifndef SIMGROUND_TASKS_H_
#define SIMGROUND_TASKS_H_

#include <array>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "simground/physics.h"

namespace simground {

enum class Family { kBasketball, kBowling };
enum class Split { kTrain, kValidation, kTest };
enum class Scale { kPaper, kDesk };

std::string_view FamilyName(Family f);
std::string_view SplitName(Split s);
std::string_view ScaleName(Scale s);
// Throw std::invalid_argument on unknown names.
Family ParseFamily(std::string_view name);
Scale ParseScale(std::string_view name);
Split ParseSplit(std::string_view name);

// Real-world latents of each family.
inline constexpr LatentFactors kBasketballTrueLatents{1.0, 0.2, 0.7};
inline constexpr LatentFactors kBowlingTrueLatents{0.25, 0.707, 0.447};

// Scene constants. Every length is in scene units.
struct BasketballLayout {
  double width = 7.0;
  double wall_height = 6.0;
  double segment_thickness = 0.1;
  double ball_radius = 0.15;
  double spawn_height = 5.0;
  double spawn_x_min = 0.3;
  double spawn_x_max = 2.7;
  double plank_length = 0.8;
  double plank_thickness = 0.05;
  // Legal plank-centre region: left of the gray line, below the green one.
  double plank_x_min = 0.5;
  double plank_x_max = 2.5;
  double plank_y_min = 1.4;
  double plank_y_max = 3.2;
  // Basket centre x is drawn uniformly from this range per task.
  double basket_x_min = 4.6;
  double basket_x_max = 5.3;
  double basket_inner_width = 0.4;
  double basket_height = 0.6;
  Material floor{0.5, 0.0};
  Material wall{0.5, 0.0};
  Material basket{0.5, 0.3};
};

struct BowlingLayout {
  double width = 7.0;
  double wall_height = 4.0;
  // A flat ledge, then a slope descending to a pit in front of the right
  // wall. The pit edge is at height 0.
  double ledge_end_x = 3.5;
  double floor_end_x = 6.0;
  double slope_degrees = 4.0;
  double pit_depth = 1.0;
  double segment_thickness = 0.1;
  // Green rests on the ledge; blue rests uphill of a bump at the pit edge.
  double green_x_min = 2.6;
  double green_x_max = 3.2;
  double blue_x = 5.5;
  double ball_radius_min = 0.2;
  double ball_radius_max = 0.35;
  double bump_radius = 0.04;
  // Red ball action grid.
  double red_x_min = 0.3;
  double red_x_max = 3.5;
  double red_height_min = 0.8;  // above the floor surface
  double red_height_max = 2.4;
  double red_radius_min = 0.15;
  double red_radius_max = 0.45;
  Material floor{0.5, 0.0};
  Material wall{0.5, 0.5};
  Material bump{0.5, 0.0};
};

struct ActionGrid {
  // Basketball: {ball positions, plank columns, plank rows}.
  // Bowling: {x positions, y positions, radii}.
  std::array<int, 3> dims{};
  int size() const { return dims[0] * dims[1] * dims[2]; }
};

ActionGrid ActionGridFor(Family family, Scale scale);

struct Action {
  int index = 0;
  // Basketball: {ball_x, plank_x, plank_y}. Bowling: {x, y, radius}.
  std::array<double, 3> params{};
};

struct RolloutSchedule {
  int max_steps = 0;
  int observe_every = 1;
};

struct TaskSpec {
  Family family = Family::kBasketball;
  int id = 0;
  Scale scale = Scale::kDesk;
  Split split = Split::kTrain;
  // Fixed bodies plus green/blue balls; the action bodies are added by
  // SceneForAction.
  Scene scene;
  RolloutSchedule schedule;
  ActionGrid grid;
  // Per-task variation: basketball {basket_x}; bowling {green_x, green_r,
  // blue_r}.
  std::vector<double> variation;
  // Basket interior (basketball only): min and max corners.
  Vec2 basket_min;
  Vec2 basket_max;

  int action_count() const { return grid.size(); }
};

struct FamilySizes {
  int train = 0;
  int validation = 0;
  int test = 0;
  int total() const { return train + validation + test; }
};
FamilySizes SizesFor(Family family);

const BasketballLayout& DefaultBasketballLayout();
const BowlingLayout& DefaultBowlingLayout();

// Pure function of its arguments. Throws std::out_of_range on bad ids.
TaskSpec BuildTask(Family family, int task_id, Scale scale);
std::vector<TaskSpec> BuildSplit(Family family, Split split, Scale scale);

// Throws std::out_of_range on bad indices.
Action DecodeAction(const TaskSpec& task, int index);
// Inverse of DecodeAction for grid points; throws if params are off-grid.
int EncodeAction(const TaskSpec& task, const std::array<double, 3>& params);

// Full scene for one action. Estimated bodies carry no material so they take
// the environment's latent factors.
Scene SceneForAction(const TaskSpec& task, const Action& action);

// Watches a rollout for the family goal and tracks progress statistics.
class TaskMonitor : public GoalMonitor {
 public:
  virtual bool solved() const = 0;
  virtual double progress() const = 0;
};

std::unique_ptr<TaskMonitor> MakeMonitor(const TaskSpec& task,
                                         const Scene& scene);

// Consecutive steps of green-blue contact that count as solving Bowling.
inline constexpr int kBowlingContactSteps = 720;

struct TaskOutcome {
  bool solved = false;
  double progress = 0.0;
};

struct TaskRun {
  Trajectory trajectory;
  TaskOutcome outcome;
};

// Rolls out one action on one task under `env`, stopping on the goal.
TaskRun RunAction(const TaskSpec& task, const Action& action,
                  const EnvironmentSpec& env, bool record_contacts = false);

// Goal and progress recomputed from a trajectory. Bowling needs the contact
// log; basketball uses the frames.
bool GoalAchieved(const TaskSpec& task, const Trajectory& traj);
double ProgressScore(const TaskSpec& task, const Trajectory& traj);

// One line per task: family, id, split and scene parameters.
std::string TaskManifest(const std::vector<TaskSpec>& tasks);

}  // namespace simground

#endif  // SIMGROUND_TASKS_H_
