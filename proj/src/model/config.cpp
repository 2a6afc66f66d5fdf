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

#include "polarcast/model/config.hpp"

#include "polarcast/error.hpp"

namespace polarcast::model
{

std::string to_string(CoordinateMode m)
{
  switch (m) {
    case CoordinateMode::kPolar:
      return "polar";
    case CoordinateMode::kCartesianOri:
      return "cartesian-ori";
    case CoordinateMode::kCartesianMod:
      return "cartesian-mod";
  }
  return "unknown";
}

std::string to_string(SequenceCell c) { return c == SequenceCell::kSsm ? "ssm" : "gru"; }

CoordinateMode parse_coordinate_mode(const std::string & s)
{
  for (auto m : {CoordinateMode::kPolar, CoordinateMode::kCartesianOri, CoordinateMode::kCartesianMod}) {
    if (to_string(m) == s) {
      return m;
    }
  }
  throw ConfigError("unknown coordinate mode '" + s + "' (expected polar, cartesian-ori, cartesian-mod)");
}

SequenceCell parse_sequence_cell(const std::string & s)
{
  if (s == "ssm") {
    return SequenceCell::kSsm;
  }
  if (s == "gru") {
    return SequenceCell::kGru;
  }
  throw ConfigError("unknown sequence cell '" + s + "' (expected ssm, gru)");
}

void ModelConfig::validate() const
{
  auto positive = [](std::size_t v, const char * name) {
    if (v < 1) {
      throw ConfigError(std::string("model config: ") + name + " must be >= 1");
    }
  };
  positive(hidden, "hidden");
  positive(heads, "heads");
  positive(modes, "modes");
  positive(hist_len, "hist_len");
  positive(fut_len, "fut_len");
  positive(agent_blocks, "agent_blocks");
  positive(encoder_layers, "encoder_layers");
  positive(decoder_layers, "decoder_layers");
  positive(refine_layers, "refine_layers");
  if (lane_len < 2) {
    throw ConfigError("model config: lane_len must be >= 2");
  }
  if (hidden % heads != 0) {
    throw ConfigError("model config: hidden must be divisible by heads");
  }
  if (!(dropout >= 0.0 && dropout < 1.0)) {
    throw ConfigError("model config: dropout must lie in [0, 1)");
  }
}

nlohmann::json to_json(const ModelConfig & c)
{
  return {
    {"hidden", c.hidden},
    {"heads", c.heads},
    {"modes", c.modes},
    {"hist_len", c.hist_len},
    {"fut_len", c.fut_len},
    {"lane_len", c.lane_len},
    {"agent_blocks", c.agent_blocks},
    {"encoder_layers", c.encoder_layers},
    {"decoder_layers", c.decoder_layers},
    {"refine_layers", c.refine_layers},
    {"refine_depth", c.refine_depth},
    {"share_refinement", c.share_refinement},
    {"detach_refinement", c.detach_refinement},
    {"coords", to_string(c.coords)},
    {"cell", to_string(c.cell)},
    {"motion_change", c.motion_change},
    {"relative_attention", c.relative_attention},
    {"relative_self_attention", c.relative_self_attention},
    {"dropout", c.dropout},
    {"seed", c.seed},
  };
}

ModelConfig model_config_from_json(const nlohmann::json & j)
{
  if (!j.is_object()) {
    throw ConfigError("model config: expected a JSON object");
  }
  ModelConfig c;
  const auto known = to_json(c);
  for (const auto & [key, value] : j.items()) {
    if (!known.contains(key)) {
      throw ConfigError("model config: unknown field '" + key + "'");
    }
  }
  try {
    auto read = [&](const char * key, auto & field) {
      if (j.contains(key)) {
        j.at(key).get_to(field);
      }
    };
    read("hidden", c.hidden);
    read("heads", c.heads);
    read("modes", c.modes);
    read("hist_len", c.hist_len);
    read("fut_len", c.fut_len);
    read("lane_len", c.lane_len);
    read("agent_blocks", c.agent_blocks);
    read("encoder_layers", c.encoder_layers);
    read("decoder_layers", c.decoder_layers);
    read("refine_layers", c.refine_layers);
    read("refine_depth", c.refine_depth);
    read("share_refinement", c.share_refinement);
    read("detach_refinement", c.detach_refinement);
    read("motion_change", c.motion_change);
    read("relative_attention", c.relative_attention);
    read("relative_self_attention", c.relative_self_attention);
    read("dropout", c.dropout);
    read("seed", c.seed);
    if (j.contains("coords")) {
      c.coords = parse_coordinate_mode(j.at("coords").get<std::string>());
    }
    if (j.contains("cell")) {
      c.cell = parse_sequence_cell(j.at("cell").get<std::string>());
    }
  } catch (const nlohmann::json::exception & e) {
    throw ConfigError(std::string("model config: ") + e.what());
  }
  c.validate();
  return c;
}

}  // namespace polarcast::model
