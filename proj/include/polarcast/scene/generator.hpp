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

#ifndef POLARCAST__SCENE__GENERATOR_HPP_
#define POLARCAST__SCENE__GENERATOR_HPP_

#include <array>
#include <cstdint>
#include <vector>

#include "polarcast/scene/scene.hpp"

namespace polarcast::scene
{

struct GeneratorConfig
{
  std::size_t hist_len = 20;
  std::size_t fut_len = 30;
  double dt = 0.1;
  std::size_t lane_len = 10;
  std::size_t max_agents = 8;
  std::size_t max_lanes = 16;
  // Standard deviation of Gaussian noise on observed history positions, meters.
  double noise = 0.02;
  double min_speed = 3.0;
  double max_speed = 12.0;
  // Total heading change of a turn over the prediction horizon, radians.
  double min_turn = 0.5;
  double max_turn = 1.6;
  double lane_width = 3.5;
  // Probability that a turn lane is present when the target does not take it.
  double turn_lane_prob = 0.7;
  // Kind weights used by ScenarioKind::kMixed: straight, left, right, lane change.
  std::array<double, 4> mix = {0.25, 0.25, 0.25, 0.25};

  // Throws ConfigError for inconsistent settings.
  void validate() const;
};

// Weights of the turning-heavy split used for coordinate ablations.
inline constexpr std::array<double, 4> kTurningHeavyMix = {0.1, 0.4, 0.4, 0.1};

// Kinematic parameters of the target agent, kept for oracles.
struct TargetMotion
{
  ScenarioKind kind = ScenarioKind::kStraight;
  double speed = 0.0;
  // Yaw rate of turns in rad/s (positive is left), zero otherwise.
  double turn_rate = 0.0;
  // +1 left, -1 right for lane changes, zero otherwise.
  double lateral_side = 0.0;
};

struct GeneratedScene
{
  RawScene raw;
  Scene scene;
  TargetMotion target;
};

// Well-mixed 64-bit seed for scene `index` of a dataset with base `seed`.
std::uint64_t scene_seed(std::uint64_t seed, std::uint64_t index);

/**
 * @brief Synthetic driving scene around a target agent (index 0).
 *
 * The target drives straight at constant speed over the history and then
 * follows `kind` over the future: constant velocity, a constant-yaw-rate arc
 * or a cosine lateral lane change. Lanes include the path behind the target,
 * the straight continuation, turn lanes and neighbour lanes; neighbours get
 * random kinds, speeds (some stationary) and leading invalid steps. Noise is
 * added to observed history positions only. The scene is normalized to the
 * target's current pose. kMixed draws the kind from `config.mix`.
 */
GeneratedScene generate_synthetic_scene(ScenarioKind kind, std::uint64_t seed, const GeneratorConfig & config);

// `count` scenes with seeds scene_seed(seed, i) and ids "<prefix><i>".
std::vector<Scene> generate_dataset(
  ScenarioKind kind, std::size_t count, std::uint64_t seed, const GeneratorConfig & config,
  const std::string & prefix = "scene-");

}  // namespace polarcast::scene

#endif  // POLARCAST__SCENE__GENERATOR_HPP_
