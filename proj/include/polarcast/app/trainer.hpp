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

#ifndef POLARCAST__APP__TRAINER_HPP_
#define POLARCAST__APP__TRAINER_HPP_

#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include "polarcast/app/run_config.hpp"
#include "polarcast/evalkit/metrics.hpp"
#include "polarcast/model/model.hpp"
#include "polarcast/scene/scene.hpp"

namespace polarcast::app
{

// Final-stage metrics and per-stage losses of a model on a scene set.
struct Evaluation
{
  evalkit::MetricTable table;
  evalkit::MetricReport mean;
  std::vector<std::string> stages;
  // Mean over scenes of each stage's loss (all enabled branches).
  std::vector<double> stage_loss;
  double total_loss = 0.0;

  double stage_loss_of(const std::string & stage) const;
  Json to_json() const;
};

// Evaluation-mode prediction of up to `limit` scenes (0 = all).
Evaluation evaluate(
  const model::TrajectoryModel & m, const std::vector<scene::Scene> & scenes, const objective::LossConfig & loss,
  std::size_t limit = 0);

struct EpochRecord
{
  std::size_t epoch = 0;
  double train_loss = 0.0;
  double lr = 0.0;
  double seconds = 0.0;
  Evaluation validation;

  Json to_json() const;
};

struct TrainResult
{
  std::vector<EpochRecord> history;
  std::size_t steps = 0;
  // Mean training loss of the last completed epoch.
  double final_train_loss = 0.0;
  bool aborted = false;
  std::string diagnostic;
};

/**
 * @brief AdamW training with linear warm-up and cosine decay, one scene per
 * graph and `batch_size` scenes per update.
 *
 * After every epoch the model is scored on `val`. When `out_dir` is set it
 * receives config.json, train_log.jsonl (one LossReport per step),
 * epochs.jsonl (one validation report per epoch) and checkpoint.pcck, which
 * is rewritten after every completed epoch. A non-finite loss or gradient
 * stops training, restores the last completed epoch's parameters, writes
 * abort.json and returns with `aborted` set.
 */
TrainResult train(
  model::TrajectoryModel & m, const RunConfig & cfg, const std::vector<scene::Scene> & train_set,
  const std::vector<scene::Scene> & val, const std::filesystem::path & out_dir = {});

std::string checkpoint_metadata(const RunConfig & cfg, std::size_t epoch);

struct LoadedModel
{
  RunConfig config;
  std::unique_ptr<model::TrajectoryModel> model;
};

// Rebuilds the model from the config stamped into the checkpoint.
LoadedModel load_model(const std::filesystem::path & checkpoint);

// Throws ConfigError for scenes whose sequence lengths differ from the model.
void check_scenes(const model::ModelConfig & m, const std::vector<scene::Scene> & scenes);

}  // namespace polarcast::app

#endif  // POLARCAST__APP__TRAINER_HPP_
