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

// Deterministic fixed-timestep 2D rigid-body simulation of circles and
// static capsule segments, with impulse-based contact resolution.

#ifndef SIMGROUND_PHYSICS_H_
#define SIMGROUND_PHYSICS_H_

#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace simground {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  Vec2 operator+(Vec2 o) const { return {x + o.x, y + o.y}; }
  Vec2 operator-(Vec2 o) const { return {x - o.x, y - o.y}; }
  Vec2 operator-() const { return {-x, -y}; }
  Vec2 operator*(double s) const { return {x * s, y * s}; }
  Vec2& operator+=(Vec2 o) {
    x += o.x;
    y += o.y;
    return *this;
  }
  Vec2& operator-=(Vec2 o) {
    x -= o.x;
    y -= o.y;
    return *this;
  }
  Vec2& operator*=(double s) {
    x *= s;
    y *= s;
    return *this;
  }
  bool operator==(const Vec2&) const = default;
};

inline Vec2 operator*(double s, Vec2 v) { return v * s; }
inline double Dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
// z-component of the 3D cross product.
inline double Cross(Vec2 a, Vec2 b) { return a.x * b.y - a.y * b.x; }
// omega x r for a scalar angular velocity.
inline Vec2 Cross(double w, Vec2 r) { return {-w * r.y, w * r.x}; }
inline double Length(Vec2 v) { return std::sqrt(Dot(v, v)); }

// Per-object latent physics factors shared by every estimated body.
struct LatentFactors {
  double density = 1.0;
  double friction = 0.5;
  double restitution = 0.5;

  // Throws std::invalid_argument on density <= 0, friction < 0 or
  // restitution outside [0, 1].
  void Validate() const;
  bool operator==(const LatentFactors&) const = default;
};

// Latent factors plus the unmodelled drag and the universal constants.
struct EnvironmentSpec {
  LatentFactors latents;
  // Per-second velocity retention: 1 is drag free, 0.9 loses 10% per second.
  double damping = 1.0;
  Vec2 gravity{0.0, -9.8};
  double dt = 1.0 / 240.0;

  void Validate() const;
};

// Solver constants.
inline constexpr double kBaumgarte = 0.2;
inline constexpr double kPenetrationSlop = 0.01;
inline constexpr int kVelocityIterations = 10;
// Approach speeds below this do not bounce; keeps resting contacts resting.
inline constexpr double kRestitutionThreshold = 0.25;
// Surfaces closer than this are reported as touching.
inline constexpr double kTouchMargin = 0.005;
// Cosine of the largest normal tilt from vertical counted as rolling (30 deg).
inline const double kRollingNormalCos = std::cos(30.0 * 3.14159265358979323846 / 180.0);

struct Material {
  double friction = 0.5;
  double restitution = 0.5;
  bool operator==(const Material&) const = default;
};

struct CircleShape {
  double radius = 0.0;
};

// Capsule from p1 to p2 in the body frame with the given full thickness.
struct SegmentShape {
  Vec2 p1;
  Vec2 p2;
  double thickness = 0.0;
};

enum class Motion { kStatic, kDynamic };

struct BodyDef {
  std::variant<CircleShape, SegmentShape> shape;
  Motion motion = Motion::kStatic;
  // Free label. Tags starting with "ball" mark balls, "floor" marks floors.
  std::string role;
  // Known material for scenery; bodies without one use the latent factors.
  std::optional<Material> material;

  bool IsCircle() const { return std::holds_alternative<CircleShape>(shape); }
  bool IsDynamic() const { return motion == Motion::kDynamic; }
  bool IsBall() const;
  bool IsFloor() const;
  // Throws std::invalid_argument on degenerate geometry or dynamic segments.
  void Validate() const;
};

struct BodyState {
  Vec2 position;
  Vec2 velocity;
  double angle = 0.0;
  double angular_velocity = 0.0;

  bool IsFinite() const;
  bool operator==(const BodyState&) const = default;
};

// A scene is its bodies plus one state per body. Static bodies keep their
// state forever; segment endpoints are relative to the body position.
struct Scene {
  std::vector<BodyDef> bodies;
  std::vector<BodyState> initial;

  void Validate() const;
  std::vector<int> DynamicBodies() const;
  // Index of the first body with this role, or -1.
  int Find(const std::string& role) const;
};

enum class ContactKind { kNew, kPersisting };

struct ContactEvent {
  int step = 0;
  int body_a = 0;
  int body_b = 0;
  // Unit normal pointing from body_a towards body_b.
  Vec2 normal;
  double normal_impulse = 0.0;
  ContactKind kind = ContactKind::kNew;
};

class SimulationDiverged : public std::runtime_error {
 public:
  SimulationDiverged(int body, int step);
  int body() const { return body_; }
  int step() const { return step_; }

 private:
  int body_;
  int step_;
};

struct Frame {
  int step = 0;
  // One state per dynamic body, in Trajectory::dynamic_bodies order.
  std::vector<BodyState> states;
};

struct Trajectory {
  std::vector<std::string> roles;    // per body index
  std::vector<int> dynamic_bodies;   // body indices captured in frames
  std::vector<Frame> frames;
  // Empty unless the rollout was asked to record contacts.
  std::vector<ContactEvent> contacts;
  bool contacts_recorded = false;
  int ball_collisions = 0;
  // One entry per dynamic body, zero for non-balls.
  std::vector<int> rolling_steps;
  int steps_simulated = 0;
  bool terminated = false;
  int termination_step = -1;

  int TotalRollingSteps() const;
};

// Observes a rollout step by step and decides whether the goal fired.
class GoalMonitor {
 public:
  virtual ~GoalMonitor() = default;
  virtual void Reset() = 0;
  // `state_index` is the number of steps taken so far; `contacts` are the
  // events of the step that produced this state.
  virtual bool OnStep(int state_index, std::span<const BodyState> states,
                      std::span<const ContactEvent> contacts) = 0;
};

// Stepping engine for one scene under one environment. Holds the previous
// step's touching pairs so that contact events can be labelled new or
// persisting. Cheap to construct; not thread safe, use one per thread.
class Simulator {
 public:
  Simulator(std::span<const BodyDef> bodies, const EnvironmentSpec& env);

  // Advances `states` (one per body) by one step in place. The returned
  // events stay valid until the next call.
  std::span<const ContactEvent> Step(std::span<BodyState> states);

  void ResetContacts();
  int steps_taken() const { return step_; }
  int body_count() const { return static_cast<int>(bodies_.size()); }
  // True if the pair counts towards collision statistics: both bodies use
  // the latent material.
  bool IsLatentPair(int a, int b) const;

 private:
  struct BodyInfo {
    bool dynamic = false;
    bool circle = false;
    bool ball = false;
    bool floor = false;
    bool latent = false;
    double radius = 0.0;
    SegmentShape segment;
    double inv_mass = 0.0;
    double inv_inertia = 0.0;
    Material material;
  };
  struct Contact {
    int a = 0;
    int b = 0;
    Vec2 normal;
    Vec2 ra;
    Vec2 rb;
    double penetration = 0.0;
    double normal_mass = 0.0;
    double tangent_mass = 0.0;
    double friction = 0.0;
    double bounce = 0.0;
    double bias = 0.0;
    double normal_impulse = 0.0;
    double tangent_impulse = 0.0;
    double bias_impulse = 0.0;
  };

  void Collide(std::span<const BodyState> states);
  bool CollideCircleCircle(int a, int b, std::span<const BodyState> states);
  bool CollideSegmentCircle(int seg, int circ,
                            std::span<const BodyState> states);
  void AddContact(int a, int b, Vec2 normal, Vec2 point, double penetration,
                  std::span<const BodyState> states);
  void Solve(std::span<BodyState> states);

  std::vector<BodyInfo> bodies_;
  EnvironmentSpec env_;
  double damping_factor_ = 1.0;
  int step_ = 0;
  std::vector<Contact> contacts_;
  std::vector<ContactEvent> events_;
  std::vector<Vec2> bias_velocity_;
  std::vector<double> bias_angular_;
  std::vector<std::uint64_t> touching_prev_;
  std::vector<std::uint64_t> touching_now_;
};

struct StepResult {
  std::vector<BodyState> states;
  std::vector<ContactEvent> contacts;
};

// One stateless step: every contact is reported as new.
StepResult Step(std::span<const BodyState> states, const EnvironmentSpec& env,
                std::span<const BodyDef> bodies);

// A rollout freezes once every dynamic body has moved slower than
// kSleepSpeed for kSleepSteps consecutive steps.
inline constexpr double kSleepSpeed = 1e-3;
inline constexpr int kSleepSteps = 30;

struct RolloutOptions {
  int max_steps = 500;
  int observe_every = 50;
  bool record_contacts = false;
  bool allow_sleep = true;
};

// Simulates from the scene's initial states. Frames are taken at every
// multiple of observe_every and at the final state. Stops as soon as the
// monitor fires.
Trajectory Rollout(const Scene& scene, const EnvironmentSpec& env,
                   const RolloutOptions& options,
                   GoalMonitor* monitor = nullptr);

// Recomputes the collision and rolling counters from a recorded contact log.
struct ContactCounters {
  int ball_collisions = 0;
  std::vector<int> rolling_steps;
};
ContactCounters CountersFromLog(const Scene& scene, const Trajectory& traj);

double KineticEnergy(const Scene& scene, std::span<const BodyState> states,
                     const LatentFactors& latents);

}  // namespace simground

#endif  // SIMGROUND_PHYSICS_H_
