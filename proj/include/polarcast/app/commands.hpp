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

#ifndef POLARCAST__APP__COMMANDS_HPP_
#define POLARCAST__APP__COMMANDS_HPP_

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "polarcast/app/run_config.hpp"
#include "polarcast/app/trainer.hpp"
#include "polarcast/evalkit/metrics.hpp"

namespace polarcast::app
{

// Reads POLARCAST_LOG (trace, debug, info, warn, error, off; default info)
// and routes log output to stderr.
void init_logging();

struct GenerateOptions
{
  RunConfig config;
  std::filesystem::path out;
};

// Writes config.data.count scenes and a manifest stamped with the config.
void cmd_generate(const GenerateOptions & o);

struct TrainOptions
{
  RunConfig config;
  std::filesystem::path data;
  // Validation dataset; when empty the last train.val_fraction of `data` is
  // held out.
  std::filesystem::path val;
  std::filesystem::path out;
};

// Throws NumericError carrying the diagnostic when training aborts.
TrainResult cmd_train(const TrainOptions & o);

struct EvalOptions
{
  // One checkpoint evaluates a single model; several are merged by k-means.
  std::vector<std::filesystem::path> checkpoints;
  std::filesystem::path data;
  std::filesystem::path metrics_csv;
  std::filesystem::path plot_dir;
  std::size_t max_plots = 20;
  std::size_t limit = 0;
  // Score the constant-velocity extrapolation instead of a model.
  bool baseline = false;
  std::uint64_t ensemble_seed = 0;
  bool endpoint_only = false;
  // When set, the checkpoint's model config must match it.
  std::optional<RunConfig> expected;
};

evalkit::MetricTable cmd_eval(const EvalOptions & o);

struct AblateOptions
{
  RunConfig base;
  std::filesystem::path data;
  std::filesystem::path val;
  std::filesystem::path out;
  // "section.key=v1,v2,..."; the grid is the Cartesian product of all axes.
  std::vector<std::string> axes;
};

struct AblationRow
{
  std::vector<std::string> settings;
  Evaluation validation;
  double train_loss = 0.0;
};

struct AblationTable
{
  std::vector<std::string> axes;
  std::vector<AblationRow> rows;

  std::string csv() const;
};

// Trains and evaluates every grid cell into <out>/cell_<i>, then writes
// <out>/ablation.csv.
AblationTable cmd_ablate(const AblateOptions & o);

// Split "a=1,2,[3,4]" into its key and top-level comma-separated values.
std::pair<std::string, std::vector<std::string>> parse_axis(const std::string & axis);

}  // namespace polarcast::app

#endif  // POLARCAST__APP__COMMANDS_HPP_
