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

#ifndef POLARCAST__MODEL__FEATURES_HPP_
#define POLARCAST__MODEL__FEATURES_HPP_

#include <vector>

#include "polarcast/model/config.hpp"
#include "polarcast/numcore/ops.hpp"
#include "polarcast/scene/scene.hpp"

namespace polarcast::model
{

using geometry::PolarPoint;

// Lengths (m), speeds (m/s) and accelerations (m/s^2) enter the network
// divided by this, and predicted lengths leave it multiplied by it.
inline constexpr double kLengthScale = 10.0;

std::size_t lane_channels(CoordinateMode m);
std::size_t agent_channels(CoordinateMode m);
std::size_t relation_channels(CoordinateMode m);
// Per-waypoint channels of the trajectory encoding fed to refinement.
std::size_t waypoint_channels(CoordinateMode m);

/**
 * @brief Network inputs of one scene in the configured coordinate mode.
 *
 * Element order everywhere is lanes first, then agents. Lanes with no valid
 * point and agents with no valid step are masked elements.
 */
struct SceneInputs
{
  std::size_t num_lanes = 0;
  std::size_t lane_len = 0;
  std::size_t num_agents = 0;
  std::size_t hist_len = 0;

  nc::Tensor lanes;        // [N_m x L x c_m]
  nc::Mask lane_mask;      // [N_m x L]
  nc::Tensor lane_deltas;  // [N_m x (L-1) x c_m]
  nc::Mask delta_mask;     // [N_m x (L-1)]
  nc::Tensor agents;       // [N_a x T_h x c_a]
  nc::Mask agent_mask;     // [N_a x T_h]

  std::vector<PolarPoint> keypoints;  // [N_m + N_a] centerpoints
  nc::Mask element_mask;              // [N_m + N_a]
  std::vector<std::size_t> last_valid;  // per agent, last valid step (0 if none)
  std::vector<std::size_t> aoi;

  std::size_t num_elements() const { return num_lanes + num_agents; }
};

// Throws ConfigError if the scene's lengths differ from the model's.
SceneInputs featurize(const scene::Scene & s, const ModelConfig & config);

// Lane centerpoint: the middle valid point (index floor(n/2) of the n valid
// points); the origin when no point is valid.
PolarPoint lane_centerpoint(const scene::Scene & s, std::size_t lane);

/**
 * @brief Relative keypoint features [U x V x c_rel], entry (u, v) describing
 * key v as seen from query u: (dr, cos dtheta, sin dtheta) for the polar and
 * cartesian-ori modes, (dx, dy) for cartesian-mod, lengths scaled.
 */
nc::Tensor relative_features(
  const std::vector<PolarPoint> & queries, const std::vector<PolarPoint> & keys, CoordinateMode mode);

// Keypoints as differentiable [U x 1] radius and angle columns.
struct KeypointVars
{
  nc::Var r;
  nc::Var theta;

  bool valid() const { return r.valid(); }
};

KeypointVars constant_keypoints(nc::Graph & g, const std::vector<PolarPoint> & points);

// Differentiable form of relative_features, [U x V x c_rel].
nc::Var relative_features(const KeypointVars & queries, const KeypointVars & keys, CoordinateMode mode);

// Pairwise mask [U x V]: both endpoints valid.
nc::Mask pair_mask(const nc::Mask & queries, const nc::Mask & keys);

}  // namespace polarcast::model

#endif  // POLARCAST__MODEL__FEATURES_HPP_
