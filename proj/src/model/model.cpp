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

#include "polarcast/model/model.hpp"

#include "polarcast/error.hpp"

namespace polarcast::model
{

TrajectoryModel::TrajectoryModel(const ModelConfig & config) : config_(config)
{
  config_.validate();
  nc::Rng rng(config_.seed);
  encoder_ = SceneEncoder::create(store_, "encoder", config_, rng);
  decoder_ = Decoder::create(store_, "decoder", config_, rng);
  const std::size_t stages = config_.share_refinement ? std::min<std::size_t>(config_.refine_depth, 1) : config_.refine_depth;
  for (std::size_t i = 0; i < stages; ++i) {
    refiners_.push_back(RefineStage::create(store_, "refine" + std::to_string(i), config_, rng));
  }
}

const RefineStage & TrajectoryModel::refine_stage(std::size_t i) const
{
  if (i >= config_.refine_depth) {
    throw ConfigError("refine stage " + std::to_string(i) + " exceeds depth " + std::to_string(config_.refine_depth));
  }
  return refiners_[config_.share_refinement ? 0 : i];
}

ModelOutput TrajectoryModel::forward(nc::Graph & g, const SceneInputs & in) const
{
  if (in.aoi.empty()) {
    throw ValidationError("forward: scene has no agent of interest");
  }
  ModelOutput out;
  out.context = encoder_(g, in);
  out.stages.push_back(decoder_(g, out.context, in.aoi));
  for (std::size_t i = 0; i < config_.refine_depth; ++i) {
    out.stages.push_back(refine_stage(i)(g, out.stages.back(), out.context, "refine" + std::to_string(i)));
  }
  return out;
}

ModelOutput TrajectoryModel::forward(nc::Graph & g, const scene::Scene & s) const
{
  return forward(g, featurize(s, config_));
}

std::vector<scene::TrajectoryBundle> TrajectoryModel::predict_stages(const scene::Scene & s) const
{
  nc::Graph g(false);
  const auto out = forward(g, s);
  std::vector<scene::TrajectoryBundle> bundles;
  for (const auto & st : out.stages) {
    bundles.push_back(st.bundle());
  }
  bundles.back().stage = "final";
  return bundles;
}

scene::TrajectoryBundle TrajectoryModel::predict(const scene::Scene & s) const { return predict_stages(s).back(); }

}  // namespace polarcast::model
