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

#include "simground/physics.h"

#include <algorithm>
#include <numbers>
#include <string>

namespace simground {
namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kImpulseTolerance = 1e-13;

bool StartsWith(const std::string& s, const char* prefix) {
  return s.rfind(prefix, 0) == 0;
}

bool Finite(Vec2 v) { return std::isfinite(v.x) && std::isfinite(v.y); }

std::uint64_t PairKey(int a, int b) {
  if (a > b) std::swap(a, b);
  return (static_cast<std::uint64_t>(a) << 32) | static_cast<std::uint32_t>(b);
}

}  // namespace

void LatentFactors::Validate() const {
  if (!(density > 0.0) || !std::isfinite(density)) {
    throw std::invalid_argument("latent density must be positive");
  }
  if (!(friction >= 0.0) || !std::isfinite(friction)) {
    throw std::invalid_argument("latent friction must be non-negative");
  }
  if (!(restitution >= 0.0 && restitution <= 1.0)) {
    throw std::invalid_argument("latent restitution must lie in [0, 1]");
  }
}

void EnvironmentSpec::Validate() const {
  latents.Validate();
  if (!(damping >= 0.0 && damping <= 1.0)) {
    throw std::invalid_argument("damping must lie in [0, 1]");
  }
  if (!(dt > 0.0) || !std::isfinite(dt)) {
    throw std::invalid_argument("dt must be positive");
  }
  if (!Finite(gravity)) throw std::invalid_argument("gravity must be finite");
}

bool BodyDef::IsBall() const {
  return IsCircle() && StartsWith(role, "ball");
}

bool BodyDef::IsFloor() const { return StartsWith(role, "floor"); }

void BodyDef::Validate() const {
  if (const auto* c = std::get_if<CircleShape>(&shape)) {
    if (!(c->radius > 0.0)) {
      throw std::invalid_argument("circle radius must be positive: " + role);
    }
  } else {
    const auto& s = std::get<SegmentShape>(shape);
    if (s.p1 == s.p2) {
      throw std::invalid_argument("segment endpoints must differ: " + role);
    }
    if (!(s.thickness >= 0.0)) {
      throw std::invalid_argument("segment thickness must be >= 0: " + role);
    }
    if (motion == Motion::kDynamic) {
      throw std::invalid_argument("dynamic segments are not supported: " +
                                  role);
    }
  }
  if (material) {
    if (material->friction < 0.0 || material->restitution < 0.0 ||
        material->restitution > 1.0) {
      throw std::invalid_argument("invalid material: " + role);
    }
  }
}

bool BodyState::IsFinite() const {
  return Finite(position) && Finite(velocity) && std::isfinite(angle) &&
         std::isfinite(angular_velocity);
}

void Scene::Validate() const {
  if (bodies.size() != initial.size()) {
    throw std::invalid_argument("scene needs exactly one state per body");
  }
  for (const BodyDef& b : bodies) b.Validate();
  for (const BodyState& s : initial) {
    if (!s.IsFinite()) throw std::invalid_argument("non-finite initial state");
  }
}

std::vector<int> Scene::DynamicBodies() const {
  std::vector<int> out;
  for (int i = 0; i < static_cast<int>(bodies.size()); ++i) {
    if (bodies[i].IsDynamic()) out.push_back(i);
  }
  return out;
}

int Scene::Find(const std::string& role) const {
  for (int i = 0; i < static_cast<int>(bodies.size()); ++i) {
    if (bodies[i].role == role) return i;
  }
  return -1;
}

SimulationDiverged::SimulationDiverged(int body, int step)
    : std::runtime_error("simulation diverged: body " + std::to_string(body) +
                         " at step " + std::to_string(step)),
      body_(body),
      step_(step) {}

int Trajectory::TotalRollingSteps() const {
  int total = 0;
  for (int r : rolling_steps) total += r;
  return total;
}

Simulator::Simulator(std::span<const BodyDef> bodies,
                     const EnvironmentSpec& env)
    : env_(env) {
  env_.Validate();
  damping_factor_ = std::pow(env_.damping, env_.dt);
  bodies_.reserve(bodies.size());
  for (const BodyDef& def : bodies) {
    def.Validate();
    BodyInfo info;
    info.dynamic = def.IsDynamic();
    info.circle = def.IsCircle();
    info.ball = def.IsBall();
    info.floor = def.IsFloor();
    info.latent = !def.material.has_value();
    info.material = def.material.value_or(
        Material{env_.latents.friction, env_.latents.restitution});
    if (info.circle) {
      info.radius = std::get<CircleShape>(def.shape).radius;
      if (info.dynamic) {
        const double mass = env_.latents.density * kPi * info.radius *
                            info.radius;
        info.inv_mass = 1.0 / mass;
        info.inv_inertia = 1.0 / (0.5 * mass * info.radius * info.radius);
      }
    } else {
      info.segment = std::get<SegmentShape>(def.shape);
    }
    bodies_.push_back(info);
  }
  bias_velocity_.resize(bodies_.size());
  bias_angular_.resize(bodies_.size());
}

bool Simulator::IsLatentPair(int a, int b) const {
  return bodies_[a].latent && bodies_[b].latent &&
         (bodies_[a].dynamic || bodies_[b].dynamic);
}

void Simulator::ResetContacts() {
  touching_prev_.clear();
  touching_now_.clear();
  step_ = 0;
}

void Simulator::AddContact(int a, int b, Vec2 normal, Vec2 point,
                           double penetration,
                           std::span<const BodyState> states) {
  Contact c;
  c.a = a;
  c.b = b;
  c.normal = normal;
  c.penetration = penetration;
  c.ra = point - states[a].position;
  c.rb = point - states[b].position;
  const BodyInfo& ba = bodies_[a];
  const BodyInfo& bb = bodies_[b];
  const Vec2 tangent{-normal.y, normal.x};
  const double rna = Cross(c.ra, normal);
  const double rnb = Cross(c.rb, normal);
  const double kn = ba.inv_mass + bb.inv_mass + ba.inv_inertia * rna * rna +
                    bb.inv_inertia * rnb * rnb;
  const double rta = Cross(c.ra, tangent);
  const double rtb = Cross(c.rb, tangent);
  const double kt = ba.inv_mass + bb.inv_mass + ba.inv_inertia * rta * rta +
                    bb.inv_inertia * rtb * rtb;
  c.normal_mass = kn > 0.0 ? 1.0 / kn : 0.0;
  c.tangent_mass = kt > 0.0 ? 1.0 / kt : 0.0;
  c.friction = ba.material.friction * bb.material.friction;
  if (penetration >= 0.0) {
    const Vec2 dv = states[b].velocity +
                    Cross(states[b].angular_velocity, c.rb) -
                    states[a].velocity -
                    Cross(states[a].angular_velocity, c.ra);
    const double vn = Dot(dv, normal);
    const double e = ba.material.restitution * bb.material.restitution;
    c.bounce = vn < -kRestitutionThreshold ? -e * vn : 0.0;
    c.bias = kBaumgarte / env_.dt *
             std::max(0.0, penetration - kPenetrationSlop);
  }
  contacts_.push_back(c);
}

bool Simulator::CollideCircleCircle(int a, int b,
                                    std::span<const BodyState> states) {
  const Vec2 d = states[b].position - states[a].position;
  const double ra = bodies_[a].radius;
  const double rb = bodies_[b].radius;
  const double dist2 = Dot(d, d);
  const double reach = ra + rb + kTouchMargin;
  if (dist2 > reach * reach) return false;
  const double dist = std::sqrt(dist2);
  const Vec2 n = dist > 0.0 ? d * (1.0 / dist) : Vec2{0.0, 1.0};
  const double pen = ra + rb - dist;
  const Vec2 point = states[a].position + n * (ra - 0.5 * pen);
  AddContact(a, b, n, point, pen, states);
  return true;
}

bool Simulator::CollideSegmentCircle(int seg, int circ,
                                     std::span<const BodyState> states) {
  const SegmentShape& s = bodies_[seg].segment;
  const Vec2 origin = states[seg].position;
  const Vec2 p1 = origin + s.p1;
  const Vec2 p2 = origin + s.p2;
  const Vec2 c = states[circ].position;
  const Vec2 e = p2 - p1;
  const double t = std::clamp(Dot(c - p1, e) / Dot(e, e), 0.0, 1.0);
  const Vec2 closest = p1 + e * t;
  const Vec2 d = c - closest;
  const double reach = bodies_[circ].radius + 0.5 * s.thickness;
  const double dist2 = Dot(d, d);
  if (dist2 > (reach + kTouchMargin) * (reach + kTouchMargin)) return false;
  const double dist = std::sqrt(dist2);
  Vec2 n;
  if (dist > 0.0) {
    n = d * (1.0 / dist);
  } else {
    const double len = Length(e);
    n = {-e.y / len, e.x / len};
  }
  const Vec2 point = c - n * bodies_[circ].radius;
  AddContact(seg, circ, n, point, reach - dist, states);
  return true;
}

void Simulator::Collide(std::span<const BodyState> states) {
  contacts_.clear();
  const int n = static_cast<int>(bodies_.size());
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      const BodyInfo& bi = bodies_[i];
      const BodyInfo& bj = bodies_[j];
      if (!bi.dynamic && !bj.dynamic) continue;
      if (bi.circle && bj.circle) {
        CollideCircleCircle(i, j, states);
      } else if (bi.circle) {
        CollideSegmentCircle(j, i, states);
      } else if (bj.circle) {
        CollideSegmentCircle(i, j, states);
      }
    }
  }
}

void Simulator::Solve(std::span<BodyState> states) {
  for (int iter = 0; iter < kVelocityIterations; ++iter) {
    double change = 0.0;
    for (Contact& c : contacts_) {
      if (c.penetration < 0.0) continue;
      BodyState& sa = states[c.a];
      BodyState& sb = states[c.b];
      const BodyInfo& ba = bodies_[c.a];
      const BodyInfo& bb = bodies_[c.b];
      const Vec2 tangent{-c.normal.y, c.normal.x};

      // Friction, bounded by the current normal impulse.
      Vec2 dv = sb.velocity + Cross(sb.angular_velocity, c.rb) - sa.velocity -
                Cross(sa.angular_velocity, c.ra);
      double lambda = -c.tangent_mass * Dot(dv, tangent);
      const double max_friction = c.friction * c.normal_impulse;
      const double old_t = c.tangent_impulse;
      c.tangent_impulse =
          std::clamp(old_t + lambda, -max_friction, max_friction);
      lambda = c.tangent_impulse - old_t;
      change = std::max(change, std::abs(lambda));
      Vec2 p = tangent * lambda;
      sa.velocity -= p * ba.inv_mass;
      sa.angular_velocity -= ba.inv_inertia * Cross(c.ra, p);
      sb.velocity += p * bb.inv_mass;
      sb.angular_velocity += bb.inv_inertia * Cross(c.rb, p);

      // Normal, targeting the restitution bounce.
      dv = sb.velocity + Cross(sb.angular_velocity, c.rb) - sa.velocity -
           Cross(sa.angular_velocity, c.ra);
      lambda = -c.normal_mass * (Dot(dv, c.normal) - c.bounce);
      const double old_n = c.normal_impulse;
      c.normal_impulse = std::max(old_n + lambda, 0.0);
      lambda = c.normal_impulse - old_n;
      change = std::max(change, std::abs(lambda));
      p = c.normal * lambda;
      sa.velocity -= p * ba.inv_mass;
      sa.angular_velocity -= ba.inv_inertia * Cross(c.ra, p);
      sb.velocity += p * bb.inv_mass;
      sb.angular_velocity += bb.inv_inertia * Cross(c.rb, p);

      // Positional correction through pseudo velocities that never feed back
      // into the real ones.
      if (c.bias > 0.0 || c.bias_impulse > 0.0) {
        const Vec2 dvb = bias_velocity_[c.b] +
                         Cross(bias_angular_[c.b], c.rb) -
                         bias_velocity_[c.a] -
                         Cross(bias_angular_[c.a], c.ra);
        double lb = -c.normal_mass * (Dot(dvb, c.normal) - c.bias);
        const double old_b = c.bias_impulse;
        c.bias_impulse = std::max(old_b + lb, 0.0);
        lb = c.bias_impulse - old_b;
        change = std::max(change, std::abs(lb));
        const Vec2 pb = c.normal * lb;
        bias_velocity_[c.a] -= pb * ba.inv_mass;
        bias_angular_[c.a] -= ba.inv_inertia * Cross(c.ra, pb);
        bias_velocity_[c.b] += pb * bb.inv_mass;
        bias_angular_[c.b] += bb.inv_inertia * Cross(c.rb, pb);
      }
    }
    // Converged: further sweeps would apply (numerically) nothing.
    if (change < kImpulseTolerance) break;
  }
}

std::span<const ContactEvent> Simulator::Step(std::span<BodyState> states) {
  if (states.size() != bodies_.size()) {
    throw std::invalid_argument("Step needs exactly one state per body");
  }
  const int n = static_cast<int>(bodies_.size());
  for (int i = 0; i < n; ++i) {
    if (!states[i].IsFinite()) throw SimulationDiverged(i, step_);
  }

  for (int i = 0; i < n; ++i) {
    if (!bodies_[i].dynamic) continue;
    BodyState& s = states[i];
    s.velocity += env_.gravity * env_.dt;
    s.velocity *= damping_factor_;
    s.angular_velocity *= damping_factor_;
    bias_velocity_[i] = {};
    bias_angular_[i] = 0.0;
  }

  Collide(states);
  Solve(states);

  for (int i = 0; i < n; ++i) {
    if (!bodies_[i].dynamic) continue;
    BodyState& s = states[i];
    s.position += (s.velocity + bias_velocity_[i]) * env_.dt;
    s.angle += (s.angular_velocity + bias_angular_[i]) * env_.dt;
    if (!s.IsFinite()) throw SimulationDiverged(i, step_);
  }

  events_.clear();
  touching_now_.clear();
  for (const Contact& c : contacts_) {
    const std::uint64_t key = PairKey(c.a, c.b);
    touching_now_.push_back(key);
    const bool persisting = std::binary_search(touching_prev_.begin(),
                                               touching_prev_.end(), key);
    events_.push_back(ContactEvent{
        step_, c.a, c.b, c.normal, c.normal_impulse,
        persisting ? ContactKind::kPersisting : ContactKind::kNew});
  }
  std::sort(touching_now_.begin(), touching_now_.end());
  touching_prev_.swap(touching_now_);
  ++step_;
  return events_;
}

StepResult Step(std::span<const BodyState> states, const EnvironmentSpec& env,
                std::span<const BodyDef> bodies) {
  Simulator sim(bodies, env);
  StepResult result;
  result.states.assign(states.begin(), states.end());
  const auto events = sim.Step(result.states);
  result.contacts.assign(events.begin(), events.end());
  return result;
}

namespace {

// Shared by Rollout and CountersFromLog so both count identically.
class CounterAccumulator {
 public:
  CounterAccumulator(std::span<const BodyDef> bodies,
                     std::span<const int> dynamic_bodies)
      : bodies_(bodies), rolling_(dynamic_bodies.size(), 0) {
    slot_.assign(bodies.size(), -1);
    for (int k = 0; k < static_cast<int>(dynamic_bodies.size()); ++k) {
      slot_[dynamic_bodies[k]] = k;
    }
    rolled_this_step_.assign(dynamic_bodies.size(), 0);
  }

  void AddStep(std::span<const ContactEvent> events) {
    std::fill(rolled_this_step_.begin(), rolled_this_step_.end(), 0);
    for (const ContactEvent& e : events) {
      const BodyDef& a = bodies_[e.body_a];
      const BodyDef& b = bodies_[e.body_b];
      if (e.kind == ContactKind::kNew && !a.material && !b.material &&
          (a.IsDynamic() || b.IsDynamic())) {
        ++collisions_;
      }
      if (e.kind != ContactKind::kPersisting) continue;
      if (std::abs(e.normal.y) < kRollingNormalCos) continue;
      if (a.IsFloor() && b.IsBall() && b.IsDynamic()) {
        rolled_this_step_[slot_[e.body_b]] = 1;
      } else if (b.IsFloor() && a.IsBall() && a.IsDynamic()) {
        rolled_this_step_[slot_[e.body_a]] = 1;
      }
    }
    for (std::size_t k = 0; k < rolling_.size(); ++k) {
      rolling_[k] += rolled_this_step_[k];
    }
  }

  int collisions() const { return collisions_; }
  const std::vector<int>& rolling() const { return rolling_; }

 private:
  std::span<const BodyDef> bodies_;
  std::vector<int> slot_;
  std::vector<int> rolling_;
  std::vector<int> rolled_this_step_;
  int collisions_ = 0;
};

Frame CaptureFrame(int step, std::span<const BodyState> states,
                   std::span<const int> dynamic_bodies) {
  Frame f;
  f.step = step;
  f.states.reserve(dynamic_bodies.size());
  for (int i : dynamic_bodies) f.states.push_back(states[i]);
  return f;
}

bool AtRest(const Scene& scene, std::span<const int> dynamic,
            std::span<const BodyState> states) {
  for (int i : dynamic) {
    const double r = std::get<CircleShape>(scene.bodies[i].shape).radius;
    const BodyState& st = states[i];
    if (Length(st.velocity) > kSleepSpeed ||
        std::abs(st.angular_velocity) * r > kSleepSpeed) {
      return false;
    }
  }
  return true;
}

}  // namespace

Trajectory Rollout(const Scene& scene, const EnvironmentSpec& env,
                   const RolloutOptions& options, GoalMonitor* monitor) {
  if (options.max_steps <= 0) {
    throw std::invalid_argument("max_steps must be positive");
  }
  if (options.observe_every < 1) {
    throw std::invalid_argument("observe_every must be >= 1");
  }
  scene.Validate();
  Simulator sim(scene.bodies, env);

  Trajectory traj;
  traj.roles.reserve(scene.bodies.size());
  for (const BodyDef& b : scene.bodies) traj.roles.push_back(b.role);
  traj.dynamic_bodies = scene.DynamicBodies();
  traj.contacts_recorded = options.record_contacts;
  traj.frames.reserve(options.max_steps / options.observe_every + 2);

  std::vector<BodyState> states = scene.initial;
  CounterAccumulator counters(scene.bodies, traj.dynamic_bodies);
  if (monitor) monitor->Reset();
  traj.frames.push_back(CaptureFrame(0, states, traj.dynamic_bodies));

  int state_index = 0;
  int quiet_steps = 0;
  std::vector<ContactEvent> resting_events;
  while (state_index < options.max_steps) {
    std::span<const ContactEvent> events;
    if (quiet_steps >= kSleepSteps) {
      // Every dynamic body is at rest: the state is frozen and the last
      // contact set persists.
      for (ContactEvent& e : resting_events) {
        e.step = state_index;
        e.kind = ContactKind::kPersisting;
      }
      events = resting_events;
    } else {
      events = sim.Step(states);
      if (options.allow_sleep && AtRest(scene, traj.dynamic_bodies, states)) {
        ++quiet_steps;
        if (quiet_steps == kSleepSteps) {
          resting_events.assign(events.begin(), events.end());
        }
      } else {
        quiet_steps = 0;
      }
    }
    ++state_index;
    counters.AddStep(events);
    if (options.record_contacts) {
      traj.contacts.insert(traj.contacts.end(), events.begin(), events.end());
    }
    const bool done = monitor && monitor->OnStep(state_index, states, events);
    if (done) {
      traj.terminated = true;
      traj.termination_step = state_index;
    }
    if (state_index % options.observe_every == 0 || done ||
        state_index == options.max_steps) {
      traj.frames.push_back(
          CaptureFrame(state_index, states, traj.dynamic_bodies));
    }
    if (done) break;
  }
  traj.steps_simulated = state_index;
  traj.ball_collisions = counters.collisions();
  traj.rolling_steps = counters.rolling();
  return traj;
}

ContactCounters CountersFromLog(const Scene& scene, const Trajectory& traj) {
  if (!traj.contacts_recorded) {
    throw std::invalid_argument("trajectory has no recorded contact log");
  }
  CounterAccumulator counters(scene.bodies, traj.dynamic_bodies);
  std::size_t i = 0;
  for (int step = 0; step < traj.steps_simulated; ++step) {
    const std::size_t begin = i;
    while (i < traj.contacts.size() && traj.contacts[i].step == step) ++i;
    counters.AddStep(std::span<const ContactEvent>(traj.contacts.data() + begin,
                                                   i - begin));
  }
  return {counters.collisions(), counters.rolling()};
}

double KineticEnergy(const Scene& scene, std::span<const BodyState> states,
                     const LatentFactors& latents) {
  double energy = 0.0;
  for (std::size_t i = 0; i < scene.bodies.size(); ++i) {
    const BodyDef& b = scene.bodies[i];
    if (!b.IsDynamic()) continue;
    const double r = std::get<CircleShape>(b.shape).radius;
    const double m = latents.density * kPi * r * r;
    const double inertia = 0.5 * m * r * r;
    energy += 0.5 * m * Dot(states[i].velocity, states[i].velocity) +
              0.5 * inertia * states[i].angular_velocity *
                  states[i].angular_velocity;
  }
  return energy;
}

}  // namespace simground
