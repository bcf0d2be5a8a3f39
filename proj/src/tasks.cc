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

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <sstream>
#include <stdexcept>

#include <fmt/format.h>

namespace simground {
namespace {

double GridValue(double lo, double hi, int n, int i) {
  if (n == 1) return 0.5 * (lo + hi);
  return lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
}

int GridIndex(double lo, double hi, int n, double v) {
  for (int i = 0; i < n; ++i) {
    if (std::abs(GridValue(lo, hi, n, i) - v) <= 1e-9 * (1.0 + std::abs(v))) {
      return i;
    }
  }
  throw std::invalid_argument(fmt::format("value {} is not a grid point", v));
}

BodyDef StaticSegment(Vec2 p1, Vec2 p2, double thickness, std::string role,
                      std::optional<Material> material) {
  return BodyDef{SegmentShape{p1, p2, thickness}, Motion::kStatic,
                 std::move(role), material};
}

BodyDef StaticCircle(double radius, std::string role, Material material) {
  return BodyDef{CircleShape{radius}, Motion::kStatic, std::move(role),
                 material};
}

BodyDef Ball(double radius, std::string role) {
  return BodyDef{CircleShape{radius}, Motion::kDynamic, std::move(role),
                 std::nullopt};
}

BodyState At(Vec2 p) {
  BodyState s;
  s.position = p;
  return s;
}

void Add(Scene& scene, BodyDef def, BodyState state) {
  scene.bodies.push_back(std::move(def));
  scene.initial.push_back(state);
}

std::mt19937_64 TaskRng(Family family, int task_id) {
  std::seed_seq seq{0x7a5c'0001u, static_cast<unsigned>(family),
                    static_cast<unsigned>(task_id)};
  return std::mt19937_64(seq);
}

double Uniform(std::mt19937_64& rng, double lo, double hi) {
  // Portable mapping of 53 random bits onto [lo, hi].
  const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
  return lo + (hi - lo) * u;
}

Split SplitFor(Family family, int task_id) {
  const FamilySizes sizes = SizesFor(family);
  if (task_id < sizes.train) return Split::kTrain;
  if (task_id < sizes.train + sizes.validation) return Split::kValidation;
  return Split::kTest;
}

// Bowling floor geometry: a flat ledge followed by a slope that reaches
// height 0 at the pit edge.
struct BowlingFloor {
  explicit BowlingFloor(const BowlingLayout& l)
      : layout(l),
        slope(l.slope_degrees * std::numbers::pi / 180.0),
        normal{std::sin(slope), std::cos(slope)},
        ledge_height((l.floor_end_x - l.ledge_end_x) * std::tan(slope)) {}

  // Centre of a circle of radius r resting on the floor with centre at x.
  Vec2 RestingCentre(double x, double r) const {
    const double offset = r + 0.5 * layout.segment_thickness;
    const double foot = x - normal.x * offset;
    if (foot <= layout.ledge_end_x) {
      // On the ledge, or resting on the ledge corner.
      const double dx = std::max(0.0, x - layout.ledge_end_x);
      return {x, ledge_height + std::sqrt(offset * offset - dx * dx)};
    }
    const double y = ledge_height - std::tan(slope) * (foot - layout.ledge_end_x);
    return {x, y + normal.y * offset};
  }

  // Centre of a bump of radius b on the slope touching the downhill side of
  // a ball of radius r resting at `ball`.
  Vec2 BumpBelow(Vec2 ball, double r, double b) const {
    const double hr = r + 0.5 * layout.segment_thickness;
    const double hb = b + 0.5 * layout.segment_thickness;
    const double along = std::sqrt((r + b) * (r + b) - (hr - hb) * (hr - hb));
    const Vec2 downhill{std::cos(slope), -std::sin(slope)};
    return ball + downhill * along - normal * (hr - hb);
  }

  const BowlingLayout& layout;
  double slope;
  Vec2 normal;
  double ledge_height;
};

TaskSpec BuildBasketball(int task_id, const BasketballLayout& l) {
  TaskSpec task;
  auto rng = TaskRng(Family::kBasketball, task_id);
  const double basket_x = Uniform(rng, l.basket_x_min, l.basket_x_max);
  task.variation = {basket_x};

  const double t = l.segment_thickness;
  Scene& s = task.scene;
  Add(s, StaticSegment({0.0, 0.0}, {l.width, 0.0}, t, "floor", l.floor), {});
  Add(s, StaticSegment({0.0, 0.0}, {0.0, l.wall_height}, t, "wall-left",
                       l.wall),
      {});
  Add(s, StaticSegment({l.width, 0.0}, {l.width, l.wall_height}, t,
                       "wall-right", l.wall),
      {});
  const double half = 0.5 * l.basket_inner_width + 0.5 * t;
  Add(s, StaticSegment({basket_x - half, 0.0},
                       {basket_x - half, l.basket_height}, t,
                       "basket-wall-left", l.basket),
      {});
  Add(s, StaticSegment({basket_x + half, 0.0},
                       {basket_x + half, l.basket_height}, t,
                       "basket-wall-right", l.basket),
      {});
  task.basket_min = {basket_x - 0.5 * l.basket_inner_width, 0.5 * t};
  task.basket_max = {basket_x + 0.5 * l.basket_inner_width, l.basket_height};
  task.schedule = {500, 50};
  return task;
}

TaskSpec BuildBowling(int task_id, const BowlingLayout& l) {
  TaskSpec task;
  auto rng = TaskRng(Family::kBowling, task_id);
  const double green_x = Uniform(rng, l.green_x_min, l.green_x_max);
  const double green_r = Uniform(rng, l.ball_radius_min, l.ball_radius_max);
  const double blue_r = Uniform(rng, l.ball_radius_min, l.ball_radius_max);
  task.variation = {green_x, green_r, blue_r};

  const double t = l.segment_thickness;
  const BowlingFloor floor(l);
  const double ledge = floor.ledge_height;
  Scene& s = task.scene;
  Add(s, StaticSegment({0.0, ledge}, {l.ledge_end_x, ledge}, t, "floor",
                       l.floor),
      {});
  Add(s, StaticSegment({l.ledge_end_x, ledge}, {l.floor_end_x, 0.0}, t,
                       "floor-slope", l.floor),
      {});
  Add(s, StaticSegment({l.floor_end_x, -l.pit_depth},
                       {l.width, -l.pit_depth}, t, "floor-pit", l.floor),
      {});
  Add(s, StaticSegment({l.floor_end_x, -l.pit_depth}, {l.floor_end_x, 0.0}, t,
                       "wall-pit", l.wall),
      {});
  Add(s, StaticSegment({0.0, 0.0}, {0.0, l.wall_height}, t, "wall-left",
                       l.wall),
      {});
  Add(s, StaticSegment({l.width, -l.pit_depth}, {l.width, l.wall_height}, t,
                       "wall-right", l.wall),
      {});

  const Vec2 green = floor.RestingCentre(green_x, green_r);
  const Vec2 blue = floor.RestingCentre(l.blue_x, blue_r);
  Add(s, StaticCircle(l.bump_radius, "bump", l.bump),
      At(floor.BumpBelow(blue, blue_r, l.bump_radius)));
  Add(s, Ball(green_r, "ball-green"), At(green));
  Add(s, Ball(blue_r, "ball-blue"), At(blue));
  task.schedule = {4000, 60};
  return task;
}

}  // namespace

std::string_view FamilyName(Family f) {
  return f == Family::kBasketball ? "basketball" : "bowling";
}

std::string_view SplitName(Split s) {
  switch (s) {
    case Split::kTrain:
      return "train";
    case Split::kValidation:
      return "validation";
    case Split::kTest:
      return "test";
  }
  return "unknown";
}

std::string_view ScaleName(Scale s) {
  return s == Scale::kPaper ? "paper" : "desk";
}

Family ParseFamily(std::string_view name) {
  if (name == "basketball") return Family::kBasketball;
  if (name == "bowling") return Family::kBowling;
  throw std::invalid_argument("unknown task family: " + std::string(name));
}

Scale ParseScale(std::string_view name) {
  if (name == "paper") return Scale::kPaper;
  if (name == "desk") return Scale::kDesk;
  throw std::invalid_argument("unknown scale: " + std::string(name));
}

Split ParseSplit(std::string_view name) {
  for (Split s : {Split::kTrain, Split::kValidation, Split::kTest}) {
    if (SplitName(s) == name) return s;
  }
  throw std::invalid_argument("unknown split: " + std::string(name));
}

ActionGrid ActionGridFor(Family family, Scale scale) {
  if (family == Family::kBasketball) {
    return scale == Scale::kPaper ? ActionGrid{{200, 20, 10}}
                                  : ActionGrid{{20, 5, 4}};
  }
  return scale == Scale::kPaper ? ActionGrid{{50, 50, 20}}
                                : ActionGrid{{10, 10, 5}};
}

FamilySizes SizesFor(Family family) {
  return family == Family::kBasketball ? FamilySizes{15, 5, 5}
                                       : FamilySizes{60, 20, 20};
}

const BasketballLayout& DefaultBasketballLayout() {
  static const BasketballLayout layout;
  return layout;
}

const BowlingLayout& DefaultBowlingLayout() {
  static const BowlingLayout layout;
  return layout;
}

TaskSpec BuildTask(Family family, int task_id, Scale scale) {
  const FamilySizes sizes = SizesFor(family);
  if (task_id < 0 || task_id >= sizes.total()) {
    throw std::out_of_range(fmt::format("{} task id {} outside [0, {})",
                                        FamilyName(family), task_id,
                                        sizes.total()));
  }
  TaskSpec task = family == Family::kBasketball
                      ? BuildBasketball(task_id, DefaultBasketballLayout())
                      : BuildBowling(task_id, DefaultBowlingLayout());
  task.family = family;
  task.id = task_id;
  task.scale = scale;
  task.split = SplitFor(family, task_id);
  task.grid = ActionGridFor(family, scale);
  return task;
}

std::vector<TaskSpec> BuildSplit(Family family, Split split, Scale scale) {
  std::vector<TaskSpec> out;
  for (int id = 0; id < SizesFor(family).total(); ++id) {
    if (SplitFor(family, id) == split) out.push_back(BuildTask(family, id, scale));
  }
  return out;
}

Action DecodeAction(const TaskSpec& task, int index) {
  if (index < 0 || index >= task.action_count()) {
    throw std::out_of_range(fmt::format("action {} outside [0, {})", index,
                                        task.action_count()));
  }
  const auto& d = task.grid.dims;
  const int i0 = index / (d[1] * d[2]);
  const int i1 = (index / d[2]) % d[1];
  const int i2 = index % d[2];
  Action a;
  a.index = index;
  if (task.family == Family::kBasketball) {
    const BasketballLayout& l = DefaultBasketballLayout();
    a.params = {GridValue(l.spawn_x_min, l.spawn_x_max, d[0], i0),
                GridValue(l.plank_x_min, l.plank_x_max, d[1], i1),
                GridValue(l.plank_y_min, l.plank_y_max, d[2], i2)};
  } else {
    const BowlingLayout& l = DefaultBowlingLayout();
    a.params = {GridValue(l.red_x_min, l.red_x_max, d[0], i0),
                GridValue(l.red_height_min, l.red_height_max, d[1], i1),
                GridValue(l.red_radius_min, l.red_radius_max, d[2], i2)};
  }
  return a;
}

int EncodeAction(const TaskSpec& task, const std::array<double, 3>& params) {
  const auto& d = task.grid.dims;
  std::array<int, 3> idx{};
  if (task.family == Family::kBasketball) {
    const BasketballLayout& l = DefaultBasketballLayout();
    idx = {GridIndex(l.spawn_x_min, l.spawn_x_max, d[0], params[0]),
           GridIndex(l.plank_x_min, l.plank_x_max, d[1], params[1]),
           GridIndex(l.plank_y_min, l.plank_y_max, d[2], params[2])};
  } else {
    const BowlingLayout& l = DefaultBowlingLayout();
    idx = {GridIndex(l.red_x_min, l.red_x_max, d[0], params[0]),
           GridIndex(l.red_height_min, l.red_height_max, d[1], params[1]),
           GridIndex(l.red_radius_min, l.red_radius_max, d[2], params[2])};
  }
  return (idx[0] * d[1] + idx[1]) * d[2] + idx[2];
}

Scene SceneForAction(const TaskSpec& task, const Action& action) {
  Scene scene = task.scene;
  if (task.family == Family::kBasketball) {
    const BasketballLayout& l = DefaultBasketballLayout();
    const double h = 0.5 * l.plank_length * std::numbers::sqrt2 / 2.0;
    const Vec2 centre{action.params[1], action.params[2]};
    // Descends to the right at 45 degrees so falling balls are sent
    // towards the basket.
    Add(scene,
        StaticSegment({-h, h}, {h, -h}, l.plank_thickness, "plank",
                      std::nullopt),
        At(centre));
    Add(scene, Ball(l.ball_radius, "ball-red"),
        At({action.params[0], l.spawn_height}));
  } else {
    const BowlingLayout& l = DefaultBowlingLayout();
    const BowlingFloor floor(l);
    const double x = action.params[0];
    const double r = action.params[2];
    const Vec2 rest = floor.RestingCentre(x, r);
    Add(scene, Ball(r, "ball-red"), At({x, rest.y + action.params[1]}));
  }
  return scene;
}

namespace {

class BasketballMonitor : public TaskMonitor {
 public:
  BasketballMonitor(const TaskSpec& task, const Scene& scene)
      : min_(task.basket_min),
        max_(task.basket_max),
        ball_(scene.Find("ball-red")) {}

  void Reset() override { solved_ = false; }

  bool OnStep(int, std::span<const BodyState> states,
              std::span<const ContactEvent>) override {
    const Vec2 p = states[ball_].position;
    if (p.x > min_.x && p.x < max_.x && p.y > min_.y && p.y < max_.y) {
      solved_ = true;
    }
    return solved_;
  }

  bool solved() const override { return solved_; }
  // Basketball progress needs the frames; see ProgressScore.
  double progress() const override { return solved_ ? 1.0 : 0.0; }

 private:
  Vec2 min_;
  Vec2 max_;
  int ball_;
  bool solved_ = false;
};

class BowlingMonitor : public TaskMonitor {
 public:
  explicit BowlingMonitor(const Scene& scene)
      : green_(scene.Find("ball-green")), blue_(scene.Find("ball-blue")) {}

  void Reset() override {
    run_ = 0;
    best_ = 0;
  }

  bool OnStep(int, std::span<const BodyState>,
              std::span<const ContactEvent> contacts) override {
    bool touching = false;
    for (const ContactEvent& e : contacts) {
      if ((e.body_a == green_ && e.body_b == blue_) ||
          (e.body_a == blue_ && e.body_b == green_)) {
        touching = true;
        break;
      }
    }
    run_ = touching ? run_ + 1 : 0;
    best_ = std::max(best_, run_);
    return best_ >= kBowlingContactSteps;
  }

  bool solved() const override { return best_ >= kBowlingContactSteps; }
  double progress() const override {
    if (solved()) return 1.0;
    return std::min(static_cast<double>(best_) / kBowlingContactSteps,
                    std::nextafter(1.0, 0.0));
  }
  int best_run() const { return best_; }

 private:
  int green_;
  int blue_;
  int run_ = 0;
  int best_ = 0;
};

Vec2 BasketCentre(const TaskSpec& task) {
  return (task.basket_min + task.basket_max) * 0.5;
}

double BasketballProgress(const TaskSpec& task, const Trajectory& traj) {
  const auto it = std::find(traj.roles.begin(), traj.roles.end(), "ball-red");
  const int body = static_cast<int>(it - traj.roles.begin());
  const auto slot_it =
      std::find(traj.dynamic_bodies.begin(), traj.dynamic_bodies.end(), body);
  if (slot_it == traj.dynamic_bodies.end()) {
    throw std::invalid_argument("trajectory has no basketball ball");
  }
  const std::size_t slot = slot_it - traj.dynamic_bodies.begin();
  const Vec2 centre = BasketCentre(task);
  bool inside = false;
  double best = std::numeric_limits<double>::infinity();
  for (const Frame& f : traj.frames) {
    const Vec2 p = f.states[slot].position;
    inside = inside || (p.x > task.basket_min.x && p.x < task.basket_max.x &&
                        p.y > task.basket_min.y && p.y < task.basket_max.y);
    best = std::min(best, Length(p - centre));
  }
  return inside ? 1.0 : -best;
}

}  // namespace

std::unique_ptr<TaskMonitor> MakeMonitor(const TaskSpec& task,
                                         const Scene& scene) {
  if (task.family == Family::kBasketball) {
    return std::make_unique<BasketballMonitor>(task, scene);
  }
  return std::make_unique<BowlingMonitor>(scene);
}

TaskRun RunAction(const TaskSpec& task, const Action& action,
                  const EnvironmentSpec& env, bool record_contacts) {
  const Scene scene = SceneForAction(task, action);
  auto monitor = MakeMonitor(task, scene);
  TaskRun run;
  run.trajectory = Rollout(scene, env,
                           {task.schedule.max_steps,
                            task.schedule.observe_every, record_contacts},
                           monitor.get());
  run.outcome.solved = monitor->solved();
  run.outcome.progress = task.family == Family::kBasketball
                             ? BasketballProgress(task, run.trajectory)
                             : monitor->progress();
  return run;
}

namespace {

// Replays a recorded contact log through a fresh bowling monitor.
BowlingMonitor ReplayBowling(const Trajectory& traj) {
  if (!traj.contacts_recorded) {
    throw std::invalid_argument("bowling goal needs a recorded contact log");
  }
  Scene roles_only;
  for (const std::string& role : traj.roles) {
    roles_only.bodies.push_back(BodyDef{CircleShape{1.0}, Motion::kStatic,
                                        role, std::nullopt});
  }
  BowlingMonitor monitor(roles_only);
  monitor.Reset();
  std::size_t i = 0;
  for (int step = 0; step < traj.steps_simulated; ++step) {
    const std::size_t begin = i;
    while (i < traj.contacts.size() && traj.contacts[i].step == step) ++i;
    monitor.OnStep(step + 1, {},
                   std::span<const ContactEvent>(traj.contacts.data() + begin,
                                                 i - begin));
  }
  return monitor;
}

}  // namespace

bool GoalAchieved(const TaskSpec& task, const Trajectory& traj) {
  if (task.family == Family::kBasketball) {
    return BasketballProgress(task, traj) == 1.0;
  }
  return ReplayBowling(traj).solved();
}

double ProgressScore(const TaskSpec& task, const Trajectory& traj) {
  if (task.family == Family::kBasketball) return BasketballProgress(task, traj);
  return ReplayBowling(traj).progress();
}

std::string TaskManifest(const std::vector<TaskSpec>& tasks) {
  std::ostringstream out;
  for (const TaskSpec& t : tasks) {
    out << fmt::format("{{\"family\":\"{}\",\"id\":{},\"split\":\"{}\","
                       "\"scale\":\"{}\",\"actions\":{},\"max_steps\":{},"
                       "\"observe_every\":{},\"variation\":[",
                       FamilyName(t.family), t.id, SplitName(t.split),
                       ScaleName(t.scale), t.action_count(),
                       t.schedule.max_steps, t.schedule.observe_every);
    for (std::size_t i = 0; i < t.variation.size(); ++i) {
      out << (i ? "," : "") << fmt::format("{:.9g}", t.variation[i]);
    }
    out << "]}\n";
  }
  return out.str();
}

}  // namespace simground
