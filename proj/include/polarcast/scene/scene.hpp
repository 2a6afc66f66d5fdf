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

#ifndef POLARCAST__SCENE__SCENE_HPP_
#define POLARCAST__SCENE__SCENE_HPP_

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "polarcast/geometry/polar.hpp"

namespace polarcast::scene
{

using geometry::PolarFeature;
using geometry::PolarPoint;
using geometry::Pose2;
using geometry::RelativePolar;
using geometry::Vec2;

// Per-timestep agent channels: position, velocity and acceleration as
// (magnitude, cos, sin) plus a validity flag.
inline constexpr std::size_t kAgentChannels = 10;
inline constexpr std::size_t kLaneChannels = 3;

enum class ScenarioKind
{
  kStraight,
  kTurnLeft,
  kTurnRight,
  kLaneChange,
  kMixed,
};

std::string to_string(ScenarioKind k);
// Throws ConfigError for unknown names.
ScenarioKind parse_scenario_kind(const std::string & s);

struct MotionState
{
  PolarFeature position;
  PolarFeature velocity;
  PolarFeature acceleration;
  bool valid = false;

  std::array<double, kAgentChannels> channels() const;
  static MotionState from_channels(const std::array<double, kAgentChannels> & c);

  friend bool operator==(const MotionState &, const MotionState &) = default;
};

/**
 * @brief Agent-centric scene in polar form.
 *
 * Lanes are [num_lanes x lane_len] points, agents [num_agents x hist_len]
 * states with the last history index being the current timestep, and the
 * ground truth [aoi.size() x fut_len] future positions.
 */
struct Scene
{
  std::string id;
  ScenarioKind kind = ScenarioKind::kStraight;
  double dt = 0.1;
  std::size_t lane_len = 0;
  std::size_t hist_len = 0;
  std::size_t fut_len = 0;

  std::vector<PolarFeature> lanes;
  std::vector<std::uint8_t> lane_mask;
  std::vector<MotionState> agents;
  std::vector<std::size_t> aoi;
  std::vector<PolarPoint> ground_truth;
  Pose2 frame;

  std::size_t num_lanes() const { return lane_len == 0 ? 0 : lanes.size() / lane_len; }
  std::size_t num_agents() const { return hist_len == 0 ? 0 : agents.size() / hist_len; }
  std::size_t num_aoi() const { return aoi.size(); }

  const PolarFeature & lane_point(std::size_t lane, std::size_t j) const { return lanes[lane * lane_len + j]; }
  bool lane_valid(std::size_t lane, std::size_t j) const { return lane_mask[lane * lane_len + j] != 0; }
  const MotionState & agent(std::size_t a, std::size_t t) const { return agents[a * hist_len + t]; }
  const PolarPoint & future(std::size_t n, std::size_t t) const { return ground_truth[n * fut_len + t]; }
  std::vector<std::uint8_t> agent_mask() const;

  // Agent-frame point back to the world frame the scene was normalized from.
  Vec2 to_world(const PolarPoint & p) const;

  // Throws ValidationError naming the violated invariant.
  void validate() const;

  friend bool operator==(const Scene &, const Scene &) = default;
};

// Differences of adjacent lane points, [num_lanes x (lane_len - 1)].
struct LaneChange
{
  std::size_t num_lanes = 0;
  std::size_t len = 0;
  std::vector<RelativePolar> deltas;
  std::vector<std::uint8_t> mask;

  const RelativePolar & at(std::size_t lane, std::size_t j) const { return deltas[lane * len + j]; }
};

// Delta r and wrapped delta theta between consecutive points; a segment is
// valid only when both endpoints are. Throws ConfigError if lane_len < 2.
LaneChange lane_change(const Scene & scene);

// One agent in world coordinates over history and future
// (hist_len + fut_len steps).
struct RawAgent
{
  std::vector<Vec2> positions;
  std::vector<double> headings;
  std::vector<std::uint8_t> valid;
};

struct RawLane
{
  std::vector<Vec2> points;
  std::vector<std::uint8_t> valid;
};

// Scene before normalization, in world Cartesian coordinates.
struct RawScene
{
  std::string id;
  ScenarioKind kind = ScenarioKind::kStraight;
  double dt = 0.1;
  std::size_t hist_len = 0;
  std::size_t fut_len = 0;
  std::vector<RawAgent> agents;
  std::vector<RawLane> lanes;
  std::vector<std::size_t> aoi;
};

/**
 * @brief Translate and rotate a raw scene into the frame of agent `target` at
 * the current timestep, then convert to polar.
 *
 * Velocity is the backward difference of positions over dt (forward
 * difference at the first valid step), acceleration the same over velocity,
 * both rotated into the frame and stored as (magnitude, direction).
 * Throws ValidationError if the target is not valid at the current step.
 */
Scene normalize_to_agent_frame(const RawScene & raw, std::size_t target);

// One normalized scene per agent of interest, each centred on that agent and
// predicting only it.
std::vector<Scene> normalize_per_target(const RawScene & raw);

}  // namespace polarcast::scene

#endif  // POLARCAST__SCENE__SCENE_HPP_
