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

#ifndef POLARCAST__MODEL__CONFIG_HPP_
#define POLARCAST__MODEL__CONFIG_HPP_

#include <cstdint>
#include <string>

#include <json.hpp>

namespace polarcast::model
{

// Coordinate system of model inputs, outputs and relative features.
enum class CoordinateMode
{
  kPolar,         // (r, cos, sin) inputs, (r, theta) outputs, (dr, cos, sin) relations
  kCartesianOri,  // (x, y) inputs and outputs, (dr, cos, sin) relations
  kCartesianMod,  // (x, y) inputs and outputs, (dx, dy) relations
};

enum class SequenceCell
{
  kSsm,  // gated diagonal state-space scan
  kGru,
};

std::string to_string(CoordinateMode m);
std::string to_string(SequenceCell c);
CoordinateMode parse_coordinate_mode(const std::string & s);
SequenceCell parse_sequence_cell(const std::string & s);

struct ModelConfig
{
  std::size_t hidden = 64;
  std::size_t heads = 1;
  std::size_t modes = 6;
  std::size_t hist_len = 20;
  std::size_t fut_len = 30;
  std::size_t lane_len = 10;

  std::size_t agent_blocks = 3;
  std::size_t encoder_layers = 3;
  std::size_t decoder_layers = 2;
  std::size_t refine_layers = 2;
  std::size_t refine_depth = 2;
  bool share_refinement = false;
  // Refinement consumes a stop-gradient copy of the incoming stage, so
  // refinement losses do not train the proposal decoder.
  bool detach_refinement = true;

  CoordinateMode coords = CoordinateMode::kPolar;
  SequenceCell cell = SequenceCell::kSsm;
  // Component switches: lane-change and agent motion-change inputs, relative
  // embeddings inside attention, relative (vs vanilla) trailing self-attention.
  bool motion_change = true;
  bool relative_attention = true;
  bool relative_self_attention = true;

  double dropout = 0.2;
  std::uint64_t seed = 0;

  // Throws ConfigError naming the offending field.
  void validate() const;
};

nlohmann::json to_json(const ModelConfig & c);
// Missing fields keep their defaults; unknown fields are rejected.
ModelConfig model_config_from_json(const nlohmann::json & j);

}  // namespace polarcast::model

#endif  // POLARCAST__MODEL__CONFIG_HPP_
