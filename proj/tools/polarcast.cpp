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

#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "polarcast/app/commands.hpp"
#include "polarcast/error.hpp"
#include "polarcast/scene/io.hpp"

using namespace polarcast;

namespace
{

enum ExitCode
{
  kOk = 0,
  kFailure = 1,
  kConfig = 2,
  kInput = 3,
  kNumeric = 4,
};

// Config file (or defaults), then shorthand flags, then --set overrides.
struct ConfigSource
{
  std::string file;
  std::vector<std::string> sets;
  std::vector<std::string> flags;

  app::RunConfig resolve() const
  {
    app::Json doc = app::to_json(app::RunConfig{});
    if (!file.empty()) {
      app::Json user;
      try {
        user = app::Json::parse(scene::read_text(file));
      } catch (const app::Json::parse_error & e) {
        throw ConfigError(file + ": " + e.what());
      }
      doc = app::to_json(app::run_config_from_json(user));
    }
    for (const auto & f : flags) {
      app::apply_override(doc, f);
    }
    for (const auto & s : sets) {
      app::apply_override(doc, s);
    }
    return app::run_config_from_json(doc);
  }
};

void add_config_options(CLI::App * cmd, ConfigSource & src)
{
  cmd->add_option("--config", src.file, "JSON run config")->check(CLI::ExistingFile);
  cmd->add_option("--set", src.sets, "Override a config field, e.g. model.hidden=32 (repeatable)");
}

// Records `--flag value` as the override "path=value" when given.
template <typename T>
void add_shorthand(CLI::App * cmd, ConfigSource & src, const std::string & flag, const std::string & path,
                   const std::string & help)
{
  cmd->add_option_function<T>(
    flag, [&src, path](const T & v) {
      if constexpr (std::is_same_v<T, std::string>) {
        src.flags.push_back(path + "=" + v);
      } else {
        src.flags.push_back(path + "=" + std::to_string(v));
      }
    },
    help);
}

int report(const std::string & kind, const std::exception & e, int code)
{
  std::cerr << "polarcast: error [" << kind << "]: " << e.what() << "\n";
  return code;
}

void print_table(const evalkit::MetricTable & t)
{
  const auto mean = t.mean();
  std::cout << "scenes " << t.rows.size() << "\n";
  for (const auto & v : mean.values) {
    std::printf(
      "k=%zu minADE %.4f minFDE %.4f MR %.4f b-minFDE %.4f\n", v.k, v.min_ade, v.min_fde, v.miss_rate,
      v.brier_min_fde);
  }
}

}  // namespace

int main(int argc, char ** argv)
{
  CLI::App cli{"polarcast: polar-coordinate multi-modal trajectory prediction"};
  cli.require_subcommand(1);

  ConfigSource gen_src;
  app::GenerateOptions gen;
  bool turning_heavy = false;
  auto * generate = cli.add_subcommand("generate", "Generate a synthetic scene dataset");
  add_config_options(generate, gen_src);
  generate->add_option("--out", gen.out, "Output dataset directory")->required();
  add_shorthand<std::size_t>(generate, gen_src, "--count", "data.count", "Number of scenes");
  add_shorthand<std::uint64_t>(generate, gen_src, "--seed", "data.seed", "Dataset seed");
  add_shorthand<std::string>(
    generate, gen_src, "--kind", "data.kind", "straight, turn-left, turn-right, lane-change or mixed");
  generate->add_flag("--turning-heavy", turning_heavy, "Use the turning-heavy mix for kind mixed");

  ConfigSource train_src;
  app::TrainOptions train;
  auto * train_cmd = cli.add_subcommand("train", "Train a model on a dataset");
  add_config_options(train_cmd, train_src);
  train_cmd->add_option("--data", train.data, "Training dataset directory")->required()->check(CLI::ExistingDirectory);
  train_cmd->add_option("--val", train.val, "Validation dataset directory")->check(CLI::ExistingDirectory);
  train_cmd->add_option("--out", train.out, "Output run directory")->required();
  add_shorthand<std::size_t>(train_cmd, train_src, "--epochs", "train.epochs", "Training epochs");
  add_shorthand<std::uint64_t>(train_cmd, train_src, "--seed", "model.seed", "Model initialization seed");

  ConfigSource eval_src;
  app::EvalOptions eval;
  std::string eval_checkpoint;
  auto * eval_cmd = cli.add_subcommand("eval", "Evaluate checkpoints on a dataset");
  eval_cmd->add_option("--checkpoint", eval_checkpoint, "Model checkpoint")->check(CLI::ExistingFile);
  eval_cmd->add_option("--ensemble", eval.checkpoints, "Checkpoints merged by k-means ensembling")
    ->check(CLI::ExistingFile);
  eval_cmd->add_option("--data", eval.data, "Dataset directory")->required()->check(CLI::ExistingDirectory);
  eval_cmd->add_option("--metrics-csv", eval.metrics_csv, "Write per-scene metrics CSV");
  eval_cmd->add_option("--plot-svg", eval.plot_dir, "Write one SVG per scene into this directory");
  eval_cmd->add_option("--max-plots", eval.max_plots, "Maximum number of SVG plots")->capture_default_str();
  eval_cmd->add_option("--limit", eval.limit, "Evaluate only the first N scenes");
  eval_cmd->add_option("--ensemble-seed", eval.ensemble_seed, "k-means seed")->capture_default_str();
  eval_cmd->add_flag("--endpoint-only", eval.endpoint_only, "Cluster on endpoints only");
  eval_cmd->add_flag("--baseline", eval.baseline, "Score constant-velocity extrapolation");
  eval_cmd->add_option("--config", eval_src.file, "Require the checkpoint to match this config")
    ->check(CLI::ExistingFile);

  ConfigSource ablate_src;
  app::AblateOptions ablate;
  auto * ablate_cmd = cli.add_subcommand("ablate", "Train and compare a grid of configs");
  add_config_options(ablate_cmd, ablate_src);
  ablate_cmd->add_option("--data", ablate.data, "Training dataset directory")
    ->required()
    ->check(CLI::ExistingDirectory);
  ablate_cmd->add_option("--val", ablate.val, "Validation dataset directory")
    ->required()
    ->check(CLI::ExistingDirectory);
  ablate_cmd->add_option("--out", ablate.out, "Output directory")->required();
  ablate_cmd->add_option("--grid", ablate.axes, "Axis such as model.refine_depth=0,1,2 (repeatable)")->required();
  add_shorthand<std::size_t>(ablate_cmd, ablate_src, "--epochs", "train.epochs", "Training epochs per cell");

  try {
    cli.parse(argc, argv);
  } catch (const CLI::ParseError & e) {
    return cli.exit(e);
  }

  try {
    app::init_logging();
    if (generate->parsed()) {
      if (turning_heavy) {
        gen_src.flags.push_back("data.generator.mix=[0.1,0.4,0.4,0.1]");
      }
      gen.config = gen_src.resolve();
      app::cmd_generate(gen);
    } else if (train_cmd->parsed()) {
      train.config = train_src.resolve();
      const auto r = app::cmd_train(train);
      print_table(r.history.back().validation.table);
    } else if (eval_cmd->parsed()) {
      if (!eval_checkpoint.empty()) {
        eval.checkpoints.insert(eval.checkpoints.begin(), eval_checkpoint);
      }
      if (!eval_src.file.empty()) {
        eval.expected = eval_src.resolve();
      }
      print_table(app::cmd_eval(eval));
    } else if (ablate_cmd->parsed()) {
      ablate.base = ablate_src.resolve();
      std::cout << app::cmd_ablate(ablate).csv();
    }
  } catch (const ConfigError & e) {
    return report("config", e, kConfig);
  } catch (const ParseError & e) {
    return report("parse", e, kInput);
  } catch (const ValidationError & e) {
    return report("validation", e, kInput);
  } catch (const NumericError & e) {
    return report("numeric", e, kNumeric);
  } catch (const std::exception & e) {
    return report("internal", e, kFailure);
  }
  return kOk;
}
