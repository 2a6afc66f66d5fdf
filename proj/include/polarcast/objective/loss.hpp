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

#ifndef POLARCAST__OBJECTIVE__LOSS_HPP_
#define POLARCAST__OBJECTIVE__LOSS_HPP_

#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "polarcast/model/heads.hpp"
#include "polarcast/scene/bundle.hpp"

namespace polarcast::objective
{

using geometry::PolarPoint;
using model::StageOutput;
using scene::TrajectoryBundle;

enum class Coordinate
{
  kPolar,
  kCartesian,
};

enum class LossBranches
{
  kPolar,
  kCartesian,
  kBoth,
};

std::string to_string(Coordinate c);
std::string to_string(LossBranches b);
// Accepts polar, cartesian and both; throws ConfigError otherwise.
LossBranches parse_loss_branches(const std::string & s);

struct LossConfig
{
  LossBranches branches = LossBranches::kBoth;
  // When false only the last refinement stage joins the proposal.
  bool all_refine_stages = true;

  bool uses(Coordinate c) const;
};

struct LossTerm
{
  std::string stage;
  std::string coordinate;
  std::string kind;  // "reg" or "cls"
  double value = 0.0;
};

/**
 * @brief Breakdown of one loss evaluation.
 *
 * `total` is the equal-weight sum of `terms`; `winners[s][n]` is the
 * winning mode of agent n at stage `stages[s]`.
 */
struct LossReport
{
  double total = 0.0;
  std::vector<LossTerm> terms;
  std::vector<std::string> stages;
  std::vector<std::vector<std::size_t>> winners;

  double term_sum() const;
  double stage_total(const std::string & stage) const;
  nlohmann::json to_json() const;
};

struct Loss
{
  nc::Var total;
  LossReport report;
};

// Per agent, the mode with the smallest mean Cartesian displacement from the
// ground truth [N x T]; ties go to the lowest mode index.
std::vector<std::size_t> winner_take_all(const TrajectoryBundle & b, const std::vector<PolarPoint> & gt);
std::vector<std::size_t> winner_take_all(const StageOutput & s, const std::vector<PolarPoint> & gt);

/**
 * @brief Smooth-L1 (beta = 1) between the winning modes and the ground truth,
 * averaged over agents, timesteps and both dimensions.
 *
 * The Cartesian branch compares (x, y); the polar branch compares delta r and
 * the wrapped delta theta.
 */
nc::Var regression_loss(
  const StageOutput & s, const std::vector<PolarPoint> & gt, const std::vector<std::size_t> & winners,
  Coordinate c);
double regression_loss(
  const TrajectoryBundle & b, const std::vector<PolarPoint> & gt, const std::vector<std::size_t> & winners,
  Coordinate c);

// Mean over agents of -log p[winner].
nc::Var classification_loss(const StageOutput & s, const std::vector<std::size_t> & winners);
double classification_loss(const TrajectoryBundle & b, const std::vector<std::size_t> & winners);

/**
 * @brief Regression plus classification for every stage in every enabled
 * coordinate branch, winners chosen per stage.
 *
 * `fixed_winners`, when given, replaces the argmin (one vector per stage).
 */
Loss total_loss(
  const std::vector<StageOutput> & stages, const std::vector<PolarPoint> & gt, const LossConfig & cfg = {},
  const std::vector<std::vector<std::size_t>> * fixed_winners = nullptr);
LossReport total_loss(
  const std::vector<TrajectoryBundle> & stages, const std::vector<PolarPoint> & gt, const LossConfig & cfg = {});

}  // namespace polarcast::objective

#endif  // POLARCAST__OBJECTIVE__LOSS_HPP_
