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

#include "polarcast/app/commands.hpp"

#include <cstdio>
#include <cstdlib>
#include <iostream>

#include <spdlog/sinks/stdout_sinks.h>
#include <spdlog/spdlog.h>

#include "polarcast/error.hpp"
#include "polarcast/evalkit/baseline.hpp"
#include "polarcast/evalkit/ensemble.hpp"
#include "polarcast/evalkit/plot.hpp"
#include "polarcast/scene/generator.hpp"
#include "polarcast/scene/io.hpp"

namespace polarcast::app
{

void init_logging()
{
  auto logger = spdlog::get("polarcast");
  if (!logger) {
    logger = spdlog::stderr_logger_mt("polarcast");
  }
  spdlog::set_default_logger(logger);
  spdlog::set_pattern("[%H:%M:%S] %^%l%$ %v");
  const char * env = std::getenv("POLARCAST_LOG");
  const std::string level = env == nullptr ? "info" : env;
  const auto parsed = spdlog::level::from_str(level);
  if (parsed == spdlog::level::off && level != "off") {
    throw ConfigError("POLARCAST_LOG: unknown level '" + level + "' (trace, debug, info, warn, error, off)");
  }
  spdlog::set_level(parsed);
}

void cmd_generate(const GenerateOptions & o)
{
  o.config.validate();
  const auto & d = o.config.data;
  const auto scenes = scene::generate_dataset(d.kind, d.count, d.seed, d.generator);
  scene::write_dataset(o.out, scenes, to_json(o.config)["data"]);
  spdlog::info("wrote {} {} scenes to {}", scenes.size(), scene::to_string(d.kind), o.out.string());
}

TrainResult cmd_train(const TrainOptions & o)
{
  o.config.validate();
  auto train_set = scene::read_dataset(o.data);
  std::vector<scene::Scene> val;
  if (!o.val.empty()) {
    val = scene::read_dataset(o.val);
  } else {
    const auto held = std::max<std::size_t>(
      1, static_cast<std::size_t>(o.config.train.val_fraction * static_cast<double>(train_set.size())));
    if (held >= train_set.size()) {
      throw ValidationError("train: dataset too small to hold out a validation split");
    }
    val.assign(train_set.end() - static_cast<long>(held), train_set.end());
    train_set.resize(train_set.size() - held);
  }
  spdlog::info("training on {} scenes, validating on {}", train_set.size(), val.size());
  model::TrajectoryModel m(o.config.model);
  auto result = train(m, o.config, train_set, val, o.out);
  if (result.aborted) {
    throw NumericError("training aborted (" + result.diagnostic + "); last good checkpoint kept in " + o.out.string());
  }
  return result;
}

namespace
{

std::string file_stem(const std::string & id)
{
  std::string s = id;
  for (auto & c : s) {
    if (!std::isalnum(static_cast<unsigned char>(c)) && c != '-' && c != '_') {
      c = '_';
    }
  }
  return s;
}

}  // namespace

evalkit::MetricTable cmd_eval(const EvalOptions & o)
{
  const auto all = scene::read_dataset(o.data);
  const std::size_t n = o.limit == 0 ? all.size() : std::min(o.limit, all.size());
  const std::vector<scene::Scene> scenes(all.begin(), all.begin() + static_cast<long>(n));

  std::vector<LoadedModel> models;
  if (!o.baseline) {
    if (o.checkpoints.empty()) {
      throw ConfigError("eval: no checkpoint given");
    }
    for (const auto & path : o.checkpoints) {
      models.push_back(load_model(path));
      const auto & cfg = models.back().config;
      if (o.expected) {
        const auto diff = differing_fields(to_json(o.expected->model), to_json(cfg.model), "model");
        if (!diff.empty()) {
          std::string names;
          for (const auto & d : diff) {
            names += (names.empty() ? "" : ", ") + d;
          }
          throw ConfigError("checkpoint " + path.string() + " does not match the given config in: " + names);
        }
      }
      if (cfg.model.modes != models.front().config.model.modes) {
        throw ConfigError("eval: ensemble members differ in model.modes");
      }
      check_scenes(cfg.model, scenes);
    }
  }

  if (!o.plot_dir.empty()) {
    std::filesystem::create_directories(o.plot_dir);
  }
  evalkit::MetricTable table;
  for (std::size_t i = 0; i < scenes.size(); ++i) {
    const auto & s = scenes[i];
    scene::TrajectoryBundle b;
    if (o.baseline) {
      b = evalkit::constant_velocity_bundle(s, 6);
    } else if (models.size() == 1) {
      b = models.front().model->predict(s);
    } else {
      std::vector<scene::TrajectoryBundle> members;
      for (const auto & m : models) {
        members.push_back(m.model->predict(s));
      }
      b = evalkit::kmeans_ensemble(
        members, {models.front().config.model.modes, o.ensemble_seed, o.endpoint_only});
    }
    table.add(s.id, evalkit::compute_metrics(b, s.ground_truth, evalkit::default_ks(b.modes)));
    if (!o.plot_dir.empty() && i < o.max_plots) {
      evalkit::write_svg(o.plot_dir / (file_stem(s.id) + ".svg"), s, b);
    }
  }
  if (!o.metrics_csv.empty()) {
    if (o.metrics_csv.has_parent_path()) {
      std::filesystem::create_directories(o.metrics_csv.parent_path());
    }
    evalkit::write_metrics_csv(o.metrics_csv, table);
  }
  return table;
}

std::pair<std::string, std::vector<std::string>> parse_axis(const std::string & axis)
{
  const auto eq = axis.find('=');
  if (eq == std::string::npos || eq == 0 || eq + 1 == axis.size()) {
    throw ConfigError("grid axis '" + axis + "' is not of the form section.key=v1,v2,...");
  }
  std::vector<std::string> values;
  std::string cur;
  int depth = 0;
  for (std::size_t i = eq + 1; i < axis.size(); ++i) {
    const char c = axis[i];
    depth += (c == '[' || c == '{') ? 1 : (c == ']' || c == '}') ? -1 : 0;
    if (c == ',' && depth == 0) {
      values.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  values.push_back(cur);
  for (const auto & v : values) {
    if (v.empty()) {
      throw ConfigError("grid axis '" + axis + "' has an empty value");
    }
  }
  return {axis.substr(0, eq), values};
}

std::string AblationTable::csv() const
{
  std::string out = "cell";
  for (const auto & a : axes) {
    out += "," + a;
  }
  if (!rows.empty()) {
    for (const auto & v : rows.front().validation.mean.values) {
      const std::string k = std::to_string(v.k);
      out += ",minADE_" + k + ",minFDE_" + k + ",MR_" + k + ",b-minFDE_" + k;
    }
  }
  out += ",proposal_loss,final_loss,train_loss\n";
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto & r = rows[i];
    out += std::to_string(i);
    for (const auto & s : r.settings) {
      out += "," + (s.find(',') == std::string::npos ? s : "\"" + s + "\"");
    }
    char buf[64];
    auto num = [&](double v) {
      std::snprintf(buf, sizeof(buf), ",%.10g", v);
      out += buf;
    };
    for (const auto & v : r.validation.mean.values) {
      num(v.min_ade);
      num(v.min_fde);
      num(v.miss_rate);
      num(v.brier_min_fde);
    }
    num(r.validation.stage_loss.front());
    num(r.validation.stage_loss.back());
    num(r.train_loss);
    out += "\n";
  }
  return out;
}

AblationTable cmd_ablate(const AblateOptions & o)
{
  AblationTable table;
  std::vector<std::vector<std::string>> values;
  for (const auto & a : o.axes) {
    auto [key, vals] = parse_axis(a);
    table.axes.push_back(key);
    values.push_back(vals);
  }
  std::size_t cells = 1;
  for (const auto & v : values) {
    cells *= v.size();
  }
  // Resolve every cell before training so a bad grid fails fast.
  std::vector<RunConfig> configs;
  std::vector<std::vector<std::string>> settings;
  for (std::size_t c = 0; c < cells; ++c) {
    Json doc = to_json(o.base);
    std::vector<std::string> chosen;
    std::size_t rest = c;
    for (std::size_t a = values.size(); a-- > 0;) {
      chosen.insert(chosen.begin(), values[a][rest % values[a].size()]);
      rest /= values[a].size();
    }
    for (std::size_t a = 0; a < values.size(); ++a) {
      apply_override(doc, table.axes[a] + "=" + chosen[a]);
    }
    configs.push_back(run_config_from_json(doc));
    settings.push_back(chosen);
  }

  const auto train_set = scene::read_dataset(o.data);
  const auto val = scene::read_dataset(o.val);
  for (std::size_t c = 0; c < cells; ++c) {
    std::string label;
    for (std::size_t a = 0; a < table.axes.size(); ++a) {
      label += (a ? " " : "") + table.axes[a] + "=" + settings[c][a];
    }
    spdlog::info("ablation cell {}/{}: {}", c + 1, cells, label);
    model::TrajectoryModel m(configs[c].model);
    const auto dir = o.out / ("cell_" + std::to_string(c));
    const auto result = train(m, configs[c], train_set, val, dir);
    if (result.aborted) {
      throw NumericError("ablation cell " + std::to_string(c) + " aborted: " + result.diagnostic);
    }
    table.rows.push_back({settings[c], result.history.back().validation, result.final_train_loss});
  }
  std::filesystem::create_directories(o.out);
  scene::write_text(o.out / "ablation.csv", table.csv());
  return table;
}

}  // namespace polarcast::app
