// Copyright 2026 The polarcast Authors
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

#include "polarcast/scene/generator.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "polarcast/error.hpp"

namespace polarcast::scene
{

namespace
{

using Rng = std::mt19937_64;
constexpr double kPi = std::numbers::pi;

double uniform(Rng & rng, double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); }
bool chance(Rng & rng, double p) { return uniform(rng, 0.0, 1.0) < p; }

// Motion of one agent in its own frame: origin and heading zero at the current
// timestep, straight before it.
struct Motion
{
  ScenarioKind kind = ScenarioKind::kStraight;
  double speed = 0.0;
  double turn_rate = 0.0;
  double side = 0.0;
  double lateral = 0.0;
  double horizon = 1.0;

  Vec2 position(double t) const
  {
    if (t <= 0.0 || kind == ScenarioKind::kStraight) {
      return {speed * t, 0.0};
    }
    if (kind == ScenarioKind::kLaneChange) {
      const double s = std::min(t / horizon, 1.0);
      return {speed * t, side * lateral * 0.5 * (1.0 - std::cos(kPi * s))};
    }
    const double w = turn_rate;
    return {speed / w * std::sin(w * t), speed / w * (1.0 - std::cos(w * t))};
  }

  double heading(double t) const
  {
    if (t <= 0.0 || kind == ScenarioKind::kStraight) {
      return 0.0;
    }
    if (kind == ScenarioKind::kLaneChange) {
      if (t >= horizon || speed == 0.0) {
        return 0.0;
      }
      const double dy = side * lateral * 0.5 * kPi / horizon * std::sin(kPi * t / horizon);
      return std::atan2(dy, speed);
    }
    return turn_rate * t;
  }
};

RawLane sample_lane(const std::vector<Vec2> & pts, const Pose2 & pose)
{
  RawLane lane;
  for (const auto & p : pts) {
    lane.points.push_back(pose.to_world(p));
    lane.valid.push_back(1);
  }
  return lane;
}

std::vector<Vec2> straight_points(double x0, double x1, double y, std::size_t n)
{
  std::vector<Vec2> pts(n);
  for (std::size_t j = 0; j < n; ++j) {
    const double s = n == 1 ? 0.0 : static_cast<double>(j) / static_cast<double>(n - 1);
    pts[j] = {x0 + (x1 - x0) * s, y};
  }
  return pts;
}

// Arc leaving the origin along +x with signed curvature 1/radius.
std::vector<Vec2> arc_points(double radius, double side, double length, std::size_t n)
{
  std::vector<Vec2> pts(n);
  for (std::size_t j = 0; j < n; ++j) {
    const double s = n == 1 ? 0.0 : length * static_cast<double>(j) / static_cast<double>(n - 1);
    const double a = s / radius;
    pts[j] = {radius * std::sin(a), side * radius * (1.0 - std::cos(a))};
  }
  return pts;
}

std::vector<Vec2> lane_change_points(double length, double side, double lateral, double change_len, std::size_t n)
{
  std::vector<Vec2> pts(n);
  for (std::size_t j = 0; j < n; ++j) {
    const double x = n == 1 ? 0.0 : length * static_cast<double>(j) / static_cast<double>(n - 1);
    const double s = std::min(x / change_len, 1.0);
    pts[j] = {x, side * lateral * 0.5 * (1.0 - std::cos(kPi * s))};
  }
  return pts;
}

ScenarioKind draw_kind(Rng & rng, const std::array<double, 4> & w)
{
  std::discrete_distribution<int> d(w.begin(), w.end());
  static constexpr ScenarioKind kinds[] = {
    ScenarioKind::kStraight, ScenarioKind::kTurnLeft, ScenarioKind::kTurnRight, ScenarioKind::kLaneChange};
  return kinds[d(rng)];
}

Motion draw_motion(Rng & rng, ScenarioKind kind, double speed, const GeneratorConfig & c)
{
  Motion m;
  m.kind = kind;
  m.speed = speed;
  m.horizon = static_cast<double>(c.fut_len) * c.dt;
  m.lateral = c.lane_width;
  if (kind == ScenarioKind::kTurnLeft || kind == ScenarioKind::kTurnRight) {
    const double side = kind == ScenarioKind::kTurnLeft ? 1.0 : -1.0;
    m.turn_rate = side * uniform(rng, c.min_turn, c.max_turn) / m.horizon;
    if (speed == 0.0) {
      m.kind = ScenarioKind::kStraight;
      m.turn_rate = 0.0;
    }
  } else if (kind == ScenarioKind::kLaneChange) {
    m.side = chance(rng, 0.5) ? 1.0 : -1.0;
  }
  return m;
}

RawAgent realize(
  const Motion & m, const Pose2 & pose, std::size_t hist_len, std::size_t fut_len, double dt)
{
  RawAgent a;
  const std::size_t total = hist_len + fut_len;
  for (std::size_t i = 0; i < total; ++i) {
    const double t = (static_cast<double>(i) - static_cast<double>(hist_len - 1)) * dt;
    a.positions.push_back(pose.to_world(m.position(t)));
    a.headings.push_back(geometry::wrap_angle(pose.heading + m.heading(t)));
    a.valid.push_back(1);
  }
  return a;
}

}  // namespace

void GeneratorConfig::validate() const
{
  if (hist_len < 1 || fut_len < 1) {
    throw ConfigError("generator: hist_len and fut_len must be >= 1");
  }
  if (!(dt > 0.0)) {
    throw ConfigError("generator: dt must be positive");
  }
  if (lane_len < 2) {
    throw ConfigError("generator: lane_len must be >= 2");
  }
  if (max_agents < 1 || max_lanes < 2) {
    throw ConfigError("generator: need max_agents >= 1 and max_lanes >= 2");
  }
  if (!(noise >= 0.0)) {
    throw ConfigError("generator: noise must be non-negative");
  }
  if (!(min_speed > 0.0) || max_speed < min_speed) {
    throw ConfigError("generator: need 0 < min_speed <= max_speed");
  }
  if (!(min_turn > 0.0) || max_turn < min_turn) {
    throw ConfigError("generator: need 0 < min_turn <= max_turn");
  }
  double total = 0.0;
  for (double w : mix) {
    if (!(w >= 0.0)) {
      throw ConfigError("generator: mix weights must be non-negative");
    }
    total += w;
  }
  if (!(total > 0.0)) {
    throw ConfigError("generator: mix weights must not all be zero");
  }
}

std::uint64_t scene_seed(std::uint64_t seed, std::uint64_t index)
{
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (index + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

GeneratedScene generate_synthetic_scene(ScenarioKind kind, std::uint64_t seed, const GeneratorConfig & c)
{
  c.validate();
  Rng rng(seed);
  if (kind == ScenarioKind::kMixed) {
    kind = draw_kind(rng, c.mix);
  }
  const double horizon = static_cast<double>(c.fut_len) * c.dt;
  const double past = static_cast<double>(c.hist_len - 1) * c.dt;
  const double w = c.lane_width;

  const Pose2 world{uniform(rng, -100.0, 100.0), uniform(rng, -100.0, 100.0), uniform(rng, -kPi, kPi)};
  const double speed = uniform(rng, c.min_speed, c.max_speed);
  const Motion target = draw_motion(rng, kind, speed, c);

  GeneratedScene out;
  out.target = {kind, speed, target.turn_rate, target.side};
  RawScene & raw = out.raw;
  raw.id = "seed-" + std::to_string(seed);
  raw.kind = kind;
  raw.dt = c.dt;
  raw.hist_len = c.hist_len;
  raw.fut_len = c.fut_len;
  raw.aoi = {0};
  raw.agents.push_back(realize(target, world, c.hist_len, c.fut_len, c.dt));

  const std::size_t n = c.lane_len;
  const double ahead = 1.25 * speed * horizon + 5.0;
  std::vector<RawLane> required;
  std::vector<RawLane> optional;
  required.push_back(sample_lane(straight_points(-(speed * past + 10.0), 0.0, 0.0, n), world));
  required.push_back(sample_lane(straight_points(0.0, ahead, 0.0, n), world));
  for (double side : {1.0, -1.0}) {
    const bool taken = target.turn_rate * side > 0.0;
    if (taken) {
      required.push_back(sample_lane(arc_points(speed / std::abs(target.turn_rate), side, ahead, n), world));
    } else if (chance(rng, c.turn_lane_prob)) {
      const double rate = uniform(rng, c.min_turn, c.max_turn) / horizon;
      optional.push_back(sample_lane(arc_points(speed / rate, side, ahead, n), world));
    }
  }
  for (double side : {1.0, -1.0}) {
    if (target.kind == ScenarioKind::kLaneChange && target.side == side) {
      required.push_back(sample_lane(lane_change_points(ahead, side, w, speed * horizon, n), world));
      required.push_back(sample_lane(straight_points(-(speed * past + 10.0), ahead, side * w, n), world));
    } else if (chance(rng, 0.5)) {
      optional.push_back(sample_lane(straight_points(-(speed * past + 10.0), ahead, side * w, n), world));
    }
  }

  const std::size_t neighbours = c.max_agents > 1
                                   ? std::uniform_int_distribution<std::size_t>(1, c.max_agents - 1)(rng)
                                   : 0;
  for (std::size_t i = 0; i < neighbours; ++i) {
    Pose2 local;
    const double placement = uniform(rng, 0.0, 1.0);
    if (placement < 0.6) {
      local = {uniform(rng, -30.0, 40.0), w * static_cast<double>(static_cast<int>(uniform(rng, 0.0, 3.0)) - 1) +
                                            uniform(rng, -0.3, 0.3),
               uniform(rng, -0.1, 0.1)};
    } else if (placement < 0.8) {
      local = {uniform(rng, -10.0, 50.0), w * uniform(rng, 1.0, 2.0), kPi + uniform(rng, -0.1, 0.1)};
    } else {
      const double dir = chance(rng, 0.5) ? 1.0 : -1.0;
      local = {uniform(rng, 10.0, 35.0), -dir * uniform(rng, 8.0, 30.0), dir * kPi / 2.0};
    }
    const double v = chance(rng, 0.15) ? 0.0 : uniform(rng, c.min_speed, c.max_speed);
    const Motion m = draw_motion(rng, draw_kind(rng, {0.4, 0.2, 0.2, 0.2}), v, c);
    const Pose2 pose{
      world.to_world({local.x, local.y}).x, world.to_world({local.x, local.y}).y,
      geometry::wrap_angle(world.heading + local.heading)};
    RawAgent agent = realize(m, pose, c.hist_len, c.fut_len, c.dt);
    if (c.hist_len > 2 && chance(rng, 0.3)) {
      const auto lead = std::uniform_int_distribution<std::size_t>(1, c.hist_len - 2)(rng);
      std::fill(agent.valid.begin(), agent.valid.begin() + static_cast<std::ptrdiff_t>(lead), 0);
    }
    raw.agents.push_back(std::move(agent));
    if (v > 0.0 && chance(rng, 0.5)) {
      std::vector<Vec2> pts(n);
      for (std::size_t j = 0; j < n; ++j) {
        const double t = -past + (past + horizon) * static_cast<double>(j) / static_cast<double>(n - 1);
        pts[j] = m.position(t);
      }
      optional.push_back(sample_lane(pts, pose));
    }
  }

  std::shuffle(optional.begin(), optional.end(), rng);
  for (auto & lane : required) {
    raw.lanes.push_back(std::move(lane));
  }
  for (auto & lane : optional) {
    if (raw.lanes.size() >= c.max_lanes) {
      break;
    }
    raw.lanes.push_back(std::move(lane));
  }
  if (raw.lanes.size() > c.max_lanes) {
    raw.lanes.resize(c.max_lanes);
  }
  for (auto & lane : raw.lanes) {
    if (chance(rng, 0.2)) {
      const auto cut = std::uniform_int_distribution<std::size_t>(1, n / 2)(rng);
      std::fill(lane.valid.end() - static_cast<std::ptrdiff_t>(cut), lane.valid.end(), 0);
    }
  }
  std::shuffle(raw.lanes.begin(), raw.lanes.end(), rng);

  if (c.noise > 0.0) {
    std::normal_distribution<double> noise(0.0, c.noise);
    for (auto & a : raw.agents) {
      for (std::size_t t = 0; t < c.hist_len; ++t) {
        a.positions[t].x += noise(rng);
        a.positions[t].y += noise(rng);
      }
    }
  }

  out.scene = normalize_to_agent_frame(raw, 0);
  return out;
}

std::vector<Scene> generate_dataset(
  ScenarioKind kind, std::size_t count, std::uint64_t seed, const GeneratorConfig & config,
  const std::string & prefix)
{
  std::vector<Scene> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    Scene s = generate_synthetic_scene(kind, scene_seed(seed, i), config).scene;
    s.id = prefix + std::to_string(i);
    out.push_back(std::move(s));
  }
  return out;
}

}  // namespace polarcast::scene
