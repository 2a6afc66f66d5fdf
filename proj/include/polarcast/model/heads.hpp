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

#ifndef POLARCAST__MODEL__HEADS_HPP_
#define POLARCAST__MODEL__HEADS_HPP_

#include <string>
#include <vector>

#include "polarcast/model/config.hpp"
#include "polarcast/model/encoder.hpp"
#include "polarcast/model/ret.hpp"
#include "polarcast/scene/bundle.hpp"

namespace polarcast::model
{

/**
 * @brief Differentiable trajectories of one prediction stage.
 *
 * Rows of the waypoint tensors are modes-major (row k * agents + n), columns
 * are timesteps. Both coordinate forms are always available: the native
 * form of the configured mode and its conversion.
 */
struct StageOutput
{
  std::string stage;
  std::size_t modes = 0;
  std::size_t agents = 0;
  std::size_t steps = 0;
  bool cartesian = false;  // native form is (x, y)
  nc::Var r;       // [K*N x T]
  nc::Var theta;   // [K*N x T]
  nc::Var x;       // [K*N x T]
  nc::Var y;       // [K*N x T]
  nc::Var logits;  // [N x K]

  // Values as a bundle: probabilities are the softmax of the logits, angles
  // wrapped to (-pi, pi].
  scene::TrajectoryBundle bundle() const;
};

// Completes a stage from its native coordinates: polar (r, theta) or
// Cartesian (x, y).
StageOutput polar_stage(std::string stage, nc::Var r, nc::Var theta, nc::Var logits, std::size_t k, std::size_t n);
StageOutput cartesian_stage(std::string stage, nc::Var x, nc::Var y, nc::Var logits, std::size_t k, std::size_t n);

/**
 * @brief Proposal decoder: learned mode queries plus the agent-of-interest
 * context row, vanilla transformer layers (self-attention among an agent's
 * modes, cross-attention to the scene context, feedforward), then a
 * trajectory head and a probability head.
 */
struct Decoder
{
  struct Layer
  {
    RelativeAttention self;
    RelativeAttention cross;
    nc::LayerNorm ffn_norm;
    nc::Mlp ffn;
  };

  nc::Parameter * mode_queries = nullptr;  // [K x C]
  std::vector<Layer> layers;
  nc::Mlp trajectory;
  nc::Mlp probability;
  ModelConfig config;

  static Decoder create(nc::ParameterStore & store, const std::string & name, const ModelConfig & c, nc::Rng & rng);

  StageOutput operator()(nc::Graph & g, const SceneContext & ctx, const std::vector<std::size_t> & aoi) const;
};

/**
 * @brief One refinement iteration: the incoming trajectories (as constants)
 * are encoded into mode queries, which attend to the scene context through
 * RET layers keyed by their endpoints; heads emit residual waypoint offsets
 * and fresh probabilities.
 */
struct RefineStage
{
  nc::Mlp encode;
  std::vector<RetLayer> layers;
  nc::Mlp offset;  // last layer zero-initialised
  nc::Mlp probability;
  ModelConfig config;

  static RefineStage create(nc::ParameterStore & store, const std::string & name, const ModelConfig & c, nc::Rng & rng);

  StageOutput operator()(
    nc::Graph & g, const StageOutput & in, const SceneContext & ctx, const std::string & stage) const;
};

// Trajectory query features [K*N x T*c_w] of a stage.
nc::Var trajectory_features(const StageOutput & s, CoordinateMode mode);
// Endpoint keypoints of a stage as values and as [K*N x 1] variables.
std::vector<PolarPoint> stage_endpoints(const StageOutput & s, CoordinateMode mode);
KeypointVars endpoint_vars(const StageOutput & s);

}  // namespace polarcast::model

#endif  // POLARCAST__MODEL__HEADS_HPP_
