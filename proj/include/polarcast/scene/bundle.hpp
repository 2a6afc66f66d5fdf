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

#ifndef POLARCAST__SCENE__BUNDLE_HPP_
#define POLARCAST__SCENE__BUNDLE_HPP_

#include <string>
#include <vector>

#include "polarcast/geometry/polar.hpp"

namespace polarcast::scene
{

/**
 * @brief Multi-modal trajectories with per-mode probabilities.
 *
 * traj is [K x N x T] polar waypoints in the agent frame, probs [K x N].
 * `stage` is "proposal", "refine<i>" or "final".
 */
struct TrajectoryBundle
{
  std::size_t modes = 0;
  std::size_t agents = 0;
  std::size_t steps = 0;
  std::vector<geometry::PolarPoint> traj;
  std::vector<double> probs;
  std::string stage = "proposal";

  TrajectoryBundle() = default;
  TrajectoryBundle(std::size_t k, std::size_t n, std::size_t t, std::string stage_name = "proposal");

  geometry::PolarPoint & at(std::size_t k, std::size_t n, std::size_t t) { return traj[(k * agents + n) * steps + t]; }
  const geometry::PolarPoint & at(std::size_t k, std::size_t n, std::size_t t) const
  {
    return traj[(k * agents + n) * steps + t];
  }
  double & prob(std::size_t k, std::size_t n) { return probs[k * agents + n]; }
  double prob(std::size_t k, std::size_t n) const { return probs[k * agents + n]; }

  // Throws ValidationError naming the violated invariant: probabilities
  // non-negative and summing to 1 within 1e-9 per agent, r >= 0,
  // theta in (-pi, pi].
  void validate() const;

  friend bool operator==(const TrajectoryBundle &, const TrajectoryBundle &) = default;
};

// Final waypoint of every mode, [K x N].
std::vector<geometry::PolarPoint> extract_endpoints(const TrajectoryBundle & b);

}  // namespace polarcast::scene

#endif  // POLARCAST__SCENE__BUNDLE_HPP_
