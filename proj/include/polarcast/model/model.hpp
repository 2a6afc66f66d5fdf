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

#ifndef POLARCAST__MODEL__MODEL_HPP_
#define POLARCAST__MODEL__MODEL_HPP_

#include <vector>

#include "polarcast/model/config.hpp"
#include "polarcast/model/encoder.hpp"
#include "polarcast/model/heads.hpp"
#include "polarcast/numcore/graph.hpp"
#include "polarcast/scene/scene.hpp"

namespace polarcast::model
{

struct ModelOutput
{
  SceneContext context;
  // Proposal first, then one entry per refinement iteration; the last entry is
  // the final prediction.
  std::vector<StageOutput> stages;

  const StageOutput & final_stage() const { return stages.back(); }
};

/**
 * @brief Full prediction network: scene encoder, proposal decoder and
 * `refine_depth` refinement iterations.
 *
 * Parameters are created in a fixed order from `config.seed`, so two models
 * with equal configs start identical.
 */
class TrajectoryModel
{
public:
  explicit TrajectoryModel(const ModelConfig & config);
  TrajectoryModel(const TrajectoryModel &) = delete;
  TrajectoryModel & operator=(const TrajectoryModel &) = delete;

  const ModelConfig & config() const { return config_; }
  nc::ParameterStore & parameters() { return store_; }
  const nc::ParameterStore & parameters() const { return store_; }
  const SceneEncoder & encoder() const { return encoder_; }
  const Decoder & decoder() const { return decoder_; }
  const RefineStage & refine_stage(std::size_t i) const;

  ModelOutput forward(nc::Graph & g, const SceneInputs & in) const;
  ModelOutput forward(nc::Graph & g, const scene::Scene & s) const;

  // Evaluation-mode bundles of every stage; the last is the final output.
  std::vector<scene::TrajectoryBundle> predict_stages(const scene::Scene & s) const;
  scene::TrajectoryBundle predict(const scene::Scene & s) const;

private:
  ModelConfig config_;
  nc::ParameterStore store_;
  SceneEncoder encoder_;
  Decoder decoder_;
  std::vector<RefineStage> refiners_;
};

}  // namespace polarcast::model

#endif  // POLARCAST__MODEL__MODEL_HPP_
