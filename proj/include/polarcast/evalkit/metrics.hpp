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

#ifndef POLARCAST__EVALKIT__METRICS_HPP_
#define POLARCAST__EVALKIT__METRICS_HPP_

#include <filesystem>
#include <string>
#include <vector>

#include "polarcast/scene/bundle.hpp"

namespace polarcast::evalkit
{

using geometry::PolarPoint;
using scene::TrajectoryBundle;

// Displacement metrics over the k most probable modes, meters; miss rate is
// the fraction of agents whose minFDE exceeds kMissThreshold.
struct KMetrics
{
  std::size_t k = 0;
  double min_ade = 0.0;
  double min_fde = 0.0;
  double miss_rate = 0.0;
  double brier_min_fde = 0.0;
};

inline constexpr double kMissThreshold = 2.0;
inline const std::vector<std::size_t> kDefaultKs = {1, 6};

// {1, 6}, with 6 lowered to the mode count for models with fewer modes.
std::vector<std::size_t> default_ks(std::size_t modes);

struct MetricReport
{
  std::vector<KMetrics> values;

  // Throws ValidationError if k was not evaluated.
  const KMetrics & at(std::size_t k) const;
};

/**
 * @brief minADE_k, minFDE_k, MR_k and b-minFDE_k for each k in `ks`,
 * averaged over the bundle's agents.
 *
 * Modes are ranked by descending probability (lower index first on ties)
 * and the first k are considered. b-minFDE adds (1 - p)^2 with p the
 * probability of the minFDE mode. Distances are Cartesian. Throws
 * ValidationError when k exceeds the mode count or the ground truth does not
 * match the bundle.
 */
MetricReport compute_metrics(
  const TrajectoryBundle & b, const std::vector<PolarPoint> & gt, const std::vector<std::size_t> & ks = kDefaultKs);

// Per-scene reports plus their mean.
struct MetricTable
{
  std::vector<std::string> ids;
  std::vector<MetricReport> rows;

  void add(std::string id, MetricReport r);
  // Mean of every field over rows; throws ValidationError when empty or when
  // rows evaluate different k.
  MetricReport mean() const;
};

// Columns: scene, then minADE_k, minFDE_k, MR_k, b-minFDE_k for each k; one
// row per scene and a final "mean" row. Values use 17 significant digits.
std::string metrics_csv(const MetricTable & t);
void write_metrics_csv(const std::filesystem::path & path, const MetricTable & t);

}  // namespace polarcast::evalkit

#endif  // POLARCAST__EVALKIT__METRICS_HPP_
