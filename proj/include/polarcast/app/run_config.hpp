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

#ifndef POLARCAST__APP__RUN_CONFIG_HPP_
#define POLARCAST__APP__RUN_CONFIG_HPP_

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "polarcast/model/config.hpp"
#include "polarcast/objective/loss.hpp"
#include "polarcast/scene/generator.hpp"

namespace polarcast::app
{

using Json = nlohmann::json;

struct DataConfig
{
  scene::ScenarioKind kind = scene::ScenarioKind::kMixed;
  std::size_t count = 2000;
  std::uint64_t seed = 1;
  scene::GeneratorConfig generator;
};

// Desk-scale defaults; the full-scale reference is 80 epochs with a 10-epoch
// warm-up.
struct TrainConfig
{
  std::size_t epochs = 30;
  std::size_t batch_size = 16;
  double lr = 1e-3;
  double weight_decay = 0.01;
  std::size_t warmup_epochs = 3;
  double clip_norm = 5.0;
  // Seeds shuffling and dropout.
  std::uint64_t seed = 0;
  // Fraction of the training set held out when no validation set is given.
  double val_fraction = 0.1;
  // Upper bound on validation scenes scored per epoch; 0 scores all.
  std::size_t val_limit = 0;
};

struct RunConfig
{
  model::ModelConfig model;
  objective::LossConfig loss;
  TrainConfig train;
  DataConfig data;

  // Throws ConfigError naming the offending field, including sequence
  // lengths that differ between model and data.
  void validate() const;
};

Json to_json(const RunConfig & c);
// Missing fields keep their defaults; unknown fields raise ConfigError.
RunConfig run_config_from_json(const Json & j);
RunConfig load_run_config(const std::filesystem::path & path);

/**
 * @brief Apply "section.key=value" to a config document.
 *
 * The value is parsed as JSON when possible and taken as a string otherwise.
 * Throws ConfigError for malformed assignments or unknown paths.
 */
void apply_override(Json & doc, const std::string & assignment);

// Dotted paths of leaves whose values differ between two config documents.
std::vector<std::string> differing_fields(const Json & a, const Json & b, const std::string & prefix = "");

}  // namespace polarcast::app

#endif  // POLARCAST__APP__RUN_CONFIG_HPP_
