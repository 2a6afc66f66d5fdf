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

#ifndef POLARCAST__EVALKIT__ENSEMBLE_HPP_
#define POLARCAST__EVALKIT__ENSEMBLE_HPP_

#include <cstdint>
#include <vector>

#include "polarcast/scene/bundle.hpp"

namespace polarcast::evalkit
{

struct KMeansResult
{
  std::vector<std::vector<double>> centers;
  std::vector<std::size_t> assignment;
  double wcss = 0.0;
  std::size_t iterations = 0;
};

/**
 * @brief Lloyd's k-means with k-means++ seeding from mt19937_64(seed).
 *
 * Iterates until assignments stop changing or `max_iterations`. A cluster
 * that empties is re-seeded with the point farthest from its current center.
 * Ties in assignment go to the lower center index. Throws ValidationError if
 * there are fewer points than k or the points differ in dimension.
 */
KMeansResult kmeans(
  const std::vector<std::vector<double>> & points, std::size_t k, std::uint64_t seed,
  std::size_t max_iterations = 100);

// Within-cluster sum of squared distances for a given assignment.
double within_cluster_ss(
  const std::vector<std::vector<double>> & points, const std::vector<std::vector<double>> & centers,
  const std::vector<std::size_t> & assignment);

struct EnsembleOptions
{
  std::size_t modes = 6;
  std::uint64_t seed = 0;
  // Cluster on endpoints only; output centers are still full-trajectory means.
  bool endpoint_only = false;
  std::size_t max_iterations = 100;
};

/**
 * @brief Merge the modes of several bundles into `options.modes` clusters per
 * agent.
 *
 * Trajectories are clustered as flattened Cartesian waypoints. Each output
 * mode is the mean of its members and its probability the normalized sum of
 * member probabilities; modes are ordered by descending probability. A
 * cluster whose members coincide reproduces them bit-for-bit. Throws
 * ValidationError when bundles disagree in agents or steps, or hold fewer
 * trajectories per agent than requested modes.
 */
scene::TrajectoryBundle kmeans_ensemble(
  const std::vector<scene::TrajectoryBundle> & bundles, const EnsembleOptions & options = {});

}  // namespace polarcast::evalkit

#endif  // POLARCAST__EVALKIT__ENSEMBLE_HPP_
