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

#ifndef POLARCAST__MODEL__ENCODER_HPP_
#define POLARCAST__MODEL__ENCODER_HPP_

#include <string>
#include <vector>

#include "polarcast/model/config.hpp"
#include "polarcast/model/features.hpp"
#include "polarcast/model/ret.hpp"
#include "polarcast/numcore/nn.hpp"

namespace polarcast::model
{

// PointNet: per-point MLP, then masked max-pool over each polyline.
struct PointEncoder
{
  nc::Mlp mlp;

  static PointEncoder create(
    nc::ParameterStore & store, const std::string & name, std::size_t in, std::size_t hidden, nc::Rng & rng);

  // points [G x L x c], mask [G x L] -> [G x C]; empty groups give zeros.
  nc::Var operator()(nc::Graph & g, const nc::Tensor & points, const nc::Mask & mask) const;
};

/**
 * @brief Per-channel linear recurrence h_t = a * h_{t-1} + gate_t * u_t over
 * [N x T x C] sequences, starting from h = 0.
 *
 * `decay` is [C] with entries in (0, 1). Steps with mask 0 keep the previous
 * state unchanged.
 */
nc::Var diagonal_scan(nc::Var decay, nc::Var u, nc::Var gate, const nc::Mask & mask);

struct ScanBlock
{
  nc::LayerNorm norm;
  nc::Linear input;
  nc::Linear gate;
  nc::Parameter * decay_logit = nullptr;  // [C]
  nc::Linear recurrent;                   // GRU only: C -> 3C
  nc::Linear output;
  SequenceCell cell = SequenceCell::kSsm;
  double dropout = 0.0;

  static ScanBlock create(
    nc::ParameterStore & store, const std::string & name, std::size_t hidden, SequenceCell cell, double dropout,
    nc::Rng & rng);

  // x [N x T x C] -> x + W_o GELU(h).
  nc::Var operator()(nc::Graph & g, nc::Var x, const nc::Mask & mask) const;
};

// Agent history encoder: input MLP, stacked scan blocks, layer norm of the
// last valid step. Agents with no valid step give zero rows.
struct AgentEncoder
{
  nc::Mlp input;
  std::vector<ScanBlock> blocks;
  nc::LayerNorm norm;

  static AgentEncoder create(nc::ParameterStore & store, const std::string & name, const ModelConfig & c, nc::Rng & rng);

  nc::Var operator()(nc::Graph & g, const nc::Tensor & agents, const nc::Mask & mask) const;
};

struct SceneContext
{
  nc::Var features;  // [(N_m + N_a) x C], lanes first
  std::vector<PolarPoint> keypoints;
  nc::Mask mask;
  std::size_t num_lanes = 0;
  std::size_t num_agents = 0;

  KeyedFeatures keyed() const { return {features, keypoints, mask, {}}; }
};

struct SceneEncoder
{
  PointEncoder lanes;
  PointEncoder deltas;
  nc::Mlp fuse;  // 2C -> C
  AgentEncoder agents;
  std::vector<RetLayer> layers;
  bool motion_change = true;

  static SceneEncoder create(nc::ParameterStore & store, const std::string & name, const ModelConfig & c, nc::Rng & rng);

  // Fused map features F_m' [N_m x C].
  nc::Var encode_map(nc::Graph & g, const SceneInputs & in) const;
  SceneContext operator()(nc::Graph & g, const SceneInputs & in) const;
};

}  // namespace polarcast::model

#endif  // POLARCAST__MODEL__ENCODER_HPP_
