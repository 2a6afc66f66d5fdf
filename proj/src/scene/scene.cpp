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

#include "polarcast/scene/scene.hpp"

#include <cmath>
#include <numbers>
#include <set>

#include "polarcast/error.hpp"

namespace polarcast::scene
{

using geometry::cart_to_polar;
using geometry::polar_to_cart;
using geometry::to_feature;

std::string to_string(ScenarioKind k)
{
  switch (k) {
    case ScenarioKind::kStraight:
      return "straight";
    case ScenarioKind::kTurnLeft:
      return "turn-left";
    case ScenarioKind::kTurnRight:
      return "turn-right";
    case ScenarioKind::kLaneChange:
      return "lane-change";
    case ScenarioKind::kMixed:
      return "mixed";
  }
  return "unknown";
}

ScenarioKind parse_scenario_kind(const std::string & s)
{
  for (auto k : {ScenarioKind::kStraight, ScenarioKind::kTurnLeft, ScenarioKind::kTurnRight,
                 ScenarioKind::kLaneChange, ScenarioKind::kMixed}) {
    if (to_string(k) == s) {
      return k;
    }
  }
  throw ConfigError(
    "unknown scenario kind '" + s + "' (expected straight, turn-left, turn-right, lane-change, mixed)");
}

std::array<double, kAgentChannels> MotionState::channels() const
{
  return {position.r,     position.cos_theta,     position.sin_theta,
          velocity.r,     velocity.cos_theta,     velocity.sin_theta,
          acceleration.r, acceleration.cos_theta, acceleration.sin_theta,
          valid ? 1.0 : 0.0};
}

MotionState MotionState::from_channels(const std::array<double, kAgentChannels> & c)
{
  MotionState s;
  s.position = {c[0], c[1], c[2]};
  s.velocity = {c[3], c[4], c[5]};
  s.acceleration = {c[6], c[7], c[8]};
  s.valid = c[9] != 0.0;
  return s;
}

std::vector<std::uint8_t> Scene::agent_mask() const
{
  std::vector<std::uint8_t> m(agents.size());
  for (std::size_t i = 0; i < agents.size(); ++i) {
    m[i] = agents[i].valid ? 1 : 0;
  }
  return m;
}

Vec2 Scene::to_world(const PolarPoint & p) const { return frame.to_world(polar_to_cart(p)); }

namespace
{

void check_feature(const PolarFeature & f, const std::string & where)
{
  if (!std::isfinite(f.r) || !std::isfinite(f.cos_theta) || !std::isfinite(f.sin_theta)) {
    throw ValidationError(where + ": non-finite value");
  }
  if (f.r < 0.0) {
    throw ValidationError(where + ": invariant r >= 0 violated (r = " + std::to_string(f.r) + ")");
  }
  const double n = f.cos_theta * f.cos_theta + f.sin_theta * f.sin_theta;
  if (std::abs(n - 1.0) > 1e-12) {
    throw ValidationError(where + ": invariant cos^2 + sin^2 = 1 violated");
  }
}

}  // namespace

void Scene::validate() const
{
  if (hist_len == 0 || fut_len == 0) {
    throw ValidationError("scene " + id + ": history and future lengths must be positive");
  }
  if (!(dt > 0.0)) {
    throw ValidationError("scene " + id + ": dt must be positive");
  }
  if (lane_len == 0 ? !lanes.empty() : lanes.size() % lane_len != 0) {
    throw ValidationError("scene " + id + ": lane points not a multiple of lane length");
  }
  if (lane_mask.size() != lanes.size()) {
    throw ValidationError("scene " + id + ": lane mask size differs from lane point count");
  }
  if (agents.size() % hist_len != 0) {
    throw ValidationError("scene " + id + ": agent states not a multiple of history length");
  }
  for (std::size_t i = 0; i < lanes.size(); ++i) {
    check_feature(
      lanes[i], "scene " + id + " lanes[" + std::to_string(i / lane_len) + "][" +
                  std::to_string(i % lane_len) + "]");
  }
  for (std::size_t i = 0; i < agents.size(); ++i) {
    const std::string where =
      "scene " + id + " agents[" + std::to_string(i / hist_len) + "][" + std::to_string(i % hist_len) + "]";
    check_feature(agents[i].position, where + ".position");
    check_feature(agents[i].velocity, where + ".velocity");
    check_feature(agents[i].acceleration, where + ".acceleration");
  }
  std::set<std::size_t> seen;
  for (auto a : aoi) {
    if (a >= num_agents()) {
      throw ValidationError(
        "scene " + id + ": invariant aoi < num_agents violated (aoi " + std::to_string(a) + ")");
    }
    if (!seen.insert(a).second) {
      throw ValidationError("scene " + id + ": invariant distinct aoi violated (aoi " + std::to_string(a) + ")");
    }
    if (!agent(a, hist_len - 1).valid) {
      throw ValidationError(
        "scene " + id + ": invariant aoi valid at current step violated (aoi " + std::to_string(a) + ")");
    }
  }
  if (ground_truth.size() != aoi.size() * fut_len) {
    throw ValidationError("scene " + id + ": ground truth size differs from aoi x fut_len");
  }
  for (std::size_t i = 0; i < ground_truth.size(); ++i) {
    const auto & p = ground_truth[i];
    const std::string where = "scene " + id + " ground_truth[" + std::to_string(i / fut_len) + "][" +
                              std::to_string(i % fut_len) + "]";
    if (!std::isfinite(p.r) || !std::isfinite(p.theta)) {
      throw ValidationError(where + ": non-finite value");
    }
    if (p.r < 0.0) {
      throw ValidationError(where + ": invariant r >= 0 violated (r = " + std::to_string(p.r) + ")");
    }
    if (!(p.theta > -std::numbers::pi && p.theta <= std::numbers::pi)) {
      throw ValidationError(where + ": invariant theta in (-pi, pi] violated");
    }
  }
}

LaneChange lane_change(const Scene & scene)
{
  if (scene.lane_len < 2) {
    throw ConfigError("lane_change: lanes need at least 2 points, got " + std::to_string(scene.lane_len));
  }
  LaneChange dm;
  dm.num_lanes = scene.num_lanes();
  dm.len = scene.lane_len - 1;
  dm.deltas.resize(dm.num_lanes * dm.len);
  dm.mask.resize(dm.num_lanes * dm.len);
  for (std::size_t i = 0; i < dm.num_lanes; ++i) {
    for (std::size_t j = 0; j < dm.len; ++j) {
      const bool ok = scene.lane_valid(i, j) && scene.lane_valid(i, j + 1);
      dm.mask[i * dm.len + j] = ok ? 1 : 0;
      if (ok) {
        dm.deltas[i * dm.len + j] = geometry::relative_polar(
          geometry::from_feature(scene.lane_point(i, j)), geometry::from_feature(scene.lane_point(i, j + 1)));
      }
    }
  }
  return dm;
}

namespace
{

// Backward differences of a masked sequence; the first valid entry of each
// run uses the forward difference, isolated entries give zero.
std::vector<Vec2> differentiate(
  const std::vector<Vec2> & x, const std::vector<std::uint8_t> & valid, std::size_t n, double dt)
{
  std::vector<Vec2> d(n);
  for (std::size_t t = 0; t < n; ++t) {
    if (!valid[t]) {
      continue;
    }
    if (t > 0 && valid[t - 1]) {
      d[t] = {(x[t].x - x[t - 1].x) / dt, (x[t].y - x[t - 1].y) / dt};
    } else if (t + 1 < n && valid[t + 1]) {
      d[t] = {(x[t + 1].x - x[t].x) / dt, (x[t + 1].y - x[t].y) / dt};
    }
  }
  return d;
}

PolarFeature vector_feature(Vec2 v) { return to_feature(cart_to_polar(v)); }

}  // namespace

Scene normalize_to_agent_frame(const RawScene & raw, std::size_t target)
{
  const std::size_t th = raw.hist_len;
  const std::size_t now = th - 1;
  if (th == 0 || target >= raw.agents.size()) {
    throw ValidationError("normalize: target agent " + std::to_string(target) + " does not exist");
  }
  const RawAgent & tgt = raw.agents[target];
  if (tgt.valid.size() <= now || !tgt.valid[now]) {
    throw ValidationError(
      "normalize: target agent " + std::to_string(target) + " is not valid at the current timestep");
  }

  Scene s;
  s.id = raw.id;
  s.kind = raw.kind;
  s.dt = raw.dt;
  s.hist_len = th;
  s.fut_len = raw.fut_len;
  s.frame = {tgt.positions[now].x, tgt.positions[now].y, tgt.headings[now]};

  s.lane_len = raw.lanes.empty() ? 0 : raw.lanes.front().points.size();
  for (const auto & lane : raw.lanes) {
    if (lane.points.size() != s.lane_len) {
      throw ValidationError("normalize: lanes of differing lengths in scene " + raw.id);
    }
    for (std::size_t j = 0; j < lane.points.size(); ++j) {
      s.lanes.push_back(to_feature(cart_to_polar(s.frame.to_local(lane.points[j]))));
      s.lane_mask.push_back(lane.valid[j]);
    }
  }

  for (const auto & a : raw.agents) {
    std::vector<Vec2> local(th);
    for (std::size_t t = 0; t < th; ++t) {
      local[t] = s.frame.to_local(a.positions[t]);
    }
    const auto vel = differentiate(local, a.valid, th, raw.dt);
    const auto acc = differentiate(vel, a.valid, th, raw.dt);
    for (std::size_t t = 0; t < th; ++t) {
      MotionState m;
      m.valid = a.valid[t] != 0;
      if (m.valid) {
        m.position = vector_feature(local[t]);
        m.velocity = vector_feature(vel[t]);
        m.acceleration = vector_feature(acc[t]);
      }
      s.agents.push_back(m);
    }
  }

  s.aoi = raw.aoi;
  for (auto a : s.aoi) {
    if (a >= raw.agents.size()) {
      throw ValidationError("normalize: agent of interest " + std::to_string(a) + " does not exist");
    }
    const RawAgent & ag = raw.agents[a];
    for (std::size_t t = 0; t < raw.fut_len; ++t) {
      s.ground_truth.push_back(cart_to_polar(s.frame.to_local(ag.positions[th + t])));
    }
  }
  s.validate();
  return s;
}

std::vector<Scene> normalize_per_target(const RawScene & raw)
{
  std::vector<Scene> out;
  for (auto a : raw.aoi) {
    RawScene single = raw;
    single.aoi = {a};
    Scene s = normalize_to_agent_frame(single, a);
    s.id = raw.id + "#" + std::to_string(a);
    out.push_back(std::move(s));
  }
  return out;
}

}  // namespace polarcast::scene
