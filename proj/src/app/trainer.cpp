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

#include "polarcast/app/trainer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>

#include <spdlog/spdlog.h>

#include "polarcast/error.hpp"
#include "polarcast/numcore/checkpoint.hpp"
#include "polarcast/numcore/optim.hpp"
#include "polarcast/objective/loss.hpp"
#include "polarcast/scene/io.hpp"

namespace polarcast::app
{

double Evaluation::stage_loss_of(const std::string & stage) const
{
  for (std::size_t i = 0; i < stages.size(); ++i) {
    if (stages[i] == stage) {
      return stage_loss[i];
    }
  }
  throw ValidationError("evaluation has no stage '" + stage + "'");
}

namespace
{

Json report_json(const evalkit::MetricReport & r)
{
  Json j = Json::object();
  for (const auto & v : r.values) {
    const std::string k = std::to_string(v.k);
    j["minADE_" + k] = v.min_ade;
    j["minFDE_" + k] = v.min_fde;
    j["MR_" + k] = v.miss_rate;
    j["b-minFDE_" + k] = v.brier_min_fde;
  }
  return j;
}

std::uint64_t mix(std::uint64_t a, std::uint64_t b)
{
  std::uint64_t z = a * 0x9e3779b97f4a7c15ULL + b + 0x632be59bd9b4e019ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

bool gradients_finite(const nc::ParameterStore & store)
{
  for (const auto * p : store.all()) {
    for (double v : p->grad.values()) {
      if (!std::isfinite(v)) {
        return false;
      }
    }
  }
  return true;
}

// Per-step log line with the batch-mean of every loss term.
Json step_json(std::size_t epoch, std::size_t step, double lr, const std::vector<objective::LossReport> & batch)
{
  objective::LossReport mean;
  mean.stages = batch.front().stages;
  mean.terms = batch.front().terms;
  mean.winners = batch.front().winners;
  for (auto & t : mean.terms) {
    t.value = 0.0;
  }
  for (const auto & r : batch) {
    mean.total += r.total / static_cast<double>(batch.size());
    for (std::size_t i = 0; i < r.terms.size(); ++i) {
      mean.terms[i].value += r.terms[i].value / static_cast<double>(batch.size());
    }
  }
  Json j = mean.to_json();
  j.erase("winners");
  return {{"epoch", epoch}, {"step", step}, {"lr", lr}, {"batch", batch.size()}, {"loss", j}};
}

class JsonLines
{
public:
  explicit JsonLines(const std::filesystem::path & path)
  {
    if (!path.empty()) {
      out_.open(path, std::ios::trunc);
      if (!out_) {
        throw ParseError("cannot open " + path.string() + " for writing");
      }
    }
  }

  void write(const Json & j)
  {
    if (out_.is_open()) {
      out_ << j.dump() << '\n';
      out_.flush();
    }
  }

private:
  std::ofstream out_;
};

}  // namespace

Json Evaluation::to_json() const
{
  Json losses = Json::object();
  for (std::size_t i = 0; i < stages.size(); ++i) {
    losses[stages[i]] = stage_loss[i];
  }
  return {{"scenes", table.rows.size()}, {"metrics", report_json(mean)}, {"stage_loss", losses}, {"loss", total_loss}};
}

Json EpochRecord::to_json() const
{
  return {
    {"epoch", epoch}, {"train_loss", train_loss}, {"lr", lr}, {"seconds", seconds}, {"validation", validation.to_json()}};
}

void check_scenes(const model::ModelConfig & m, const std::vector<scene::Scene> & scenes)
{
  for (const auto & s : scenes) {
    if (s.hist_len != m.hist_len || s.fut_len != m.fut_len || (s.num_lanes() > 0 && s.lane_len != m.lane_len)) {
      throw ConfigError(
        "scene " + s.id + " has hist/fut/lane lengths " + std::to_string(s.hist_len) + "/" +
        std::to_string(s.fut_len) + "/" + std::to_string(s.lane_len) + " but the model expects " +
        std::to_string(m.hist_len) + "/" + std::to_string(m.fut_len) + "/" + std::to_string(m.lane_len));
    }
  }
}

Evaluation evaluate(
  const model::TrajectoryModel & m, const std::vector<scene::Scene> & scenes, const objective::LossConfig & loss,
  std::size_t limit)
{
  const std::size_t n = limit == 0 ? scenes.size() : std::min(limit, scenes.size());
  if (n == 0) {
    throw ValidationError("evaluate: no scenes");
  }
  Evaluation ev;
  for (std::size_t i = 0; i < n; ++i) {
    const auto & s = scenes[i];
    const auto bundles = m.predict_stages(s);
    ev.table.add(s.id, evalkit::compute_metrics(bundles.back(), s.ground_truth, evalkit::default_ks(m.config().modes)));
    objective::LossConfig every = loss;
    every.all_refine_stages = true;
    const auto report = objective::total_loss(bundles, s.ground_truth, every);
    if (ev.stages.empty()) {
      ev.stages = report.stages;
      ev.stage_loss.assign(ev.stages.size(), 0.0);
    }
    for (std::size_t k = 0; k < ev.stages.size(); ++k) {
      ev.stage_loss[k] += report.stage_total(ev.stages[k]) / static_cast<double>(n);
    }
    ev.total_loss += objective::total_loss(bundles, s.ground_truth, loss).total / static_cast<double>(n);
  }
  ev.mean = ev.table.mean();
  return ev;
}

std::string checkpoint_metadata(const RunConfig & cfg, std::size_t epoch)
{
  return Json{{"format", "polarcast-checkpoint"}, {"epoch", epoch}, {"config", to_json(cfg)}}.dump();
}

TrainResult train(
  model::TrajectoryModel & m, const RunConfig & cfg, const std::vector<scene::Scene> & train_set,
  const std::vector<scene::Scene> & val, const std::filesystem::path & out_dir)
{
  cfg.validate();
  if (train_set.empty() || val.empty()) {
    throw ValidationError("train: training and validation sets must be non-empty");
  }
  check_scenes(cfg.model, train_set);
  check_scenes(cfg.model, val);

  const bool write = !out_dir.empty();
  if (write) {
    std::filesystem::create_directories(out_dir);
    scene::write_text(out_dir / "config.json", to_json(cfg).dump(2) + "\n");
  }
  JsonLines step_log(write ? out_dir / "train_log.jsonl" : std::filesystem::path{});
  JsonLines epoch_log(write ? out_dir / "epochs.jsonl" : std::filesystem::path{});
  const auto checkpoint = out_dir / "checkpoint.pcck";

  auto & store = m.parameters();
  nc::AdamWConfig opt_cfg;
  opt_cfg.lr = cfg.train.lr;
  opt_cfg.weight_decay = cfg.train.weight_decay;
  opt_cfg.clip_norm = cfg.train.clip_norm;
  nc::AdamW opt(store, opt_cfg);

  const std::size_t batch = cfg.train.batch_size;
  const std::size_t per_epoch = (train_set.size() + batch - 1) / batch;
  nc::CosineSchedule schedule{cfg.train.lr, cfg.train.warmup_epochs * per_epoch, cfg.train.epochs * per_epoch};

  std::vector<nc::Tensor> last_good;
  auto snapshot = [&] {
    last_good.clear();
    for (const auto * p : store.all()) {
      last_good.push_back(p->value);
    }
  };
  snapshot();
  if (write) {
    nc::save_checkpoint(checkpoint, store, checkpoint_metadata(cfg, 0));
  }

  TrainResult result;
  auto abort = [&](std::size_t epoch, const std::string & why) {
    auto params = store.all();
    for (std::size_t i = 0; i < params.size(); ++i) {
      params[i]->value = last_good[i];
    }
    result.aborted = true;
    result.diagnostic = "epoch " + std::to_string(epoch) + ", step " + std::to_string(result.steps) + ": " + why;
    spdlog::error("training aborted at {}; parameters restored from the last completed epoch", result.diagnostic);
    if (write) {
      scene::write_text(
        out_dir / "abort.json",
        Json{{"diagnostic", result.diagnostic}, {"epoch", epoch}, {"step", result.steps},
             {"checkpoint", checkpoint.string()}}
            .dump(2) +
          "\n");
    }
  };

  std::mt19937_64 shuffle_rng(cfg.train.seed);
  std::vector<std::size_t> order(train_set.size());
  std::iota(order.begin(), order.end(), 0);
  for (std::size_t epoch = 1; epoch <= cfg.train.epochs; ++epoch) {
    const auto start = std::chrono::steady_clock::now();
    std::shuffle(order.begin(), order.end(), shuffle_rng);
    double epoch_loss = 0.0;
    double lr = 0.0;
    for (std::size_t b0 = 0; b0 < order.size(); b0 += batch) {
      const std::size_t b1 = std::min(order.size(), b0 + batch);
      store.zero_grad();
      std::vector<objective::LossReport> reports;
      try {
        for (std::size_t i = b0; i < b1; ++i) {
          const auto & s = train_set[order[i]];
          nc::Graph g(true, mix(cfg.train.seed, result.steps * batch + (i - b0)));
          const auto out = m.forward(g, s);
          auto loss = objective::total_loss(out.stages, s.ground_truth, cfg.loss);
          if (!std::isfinite(loss.report.total)) {
            throw NumericError("non-finite loss on scene " + s.id);
          }
          g.backward(loss.total);
          reports.push_back(std::move(loss.report));
        }
        if (!gradients_finite(store)) {
          throw NumericError("non-finite gradient");
        }
      } catch (const NumericError & e) {
        abort(epoch, e.what());
        return result;
      }
      lr = schedule.at(result.steps);
      opt.step(lr, 1.0 / static_cast<double>(b1 - b0));
      ++result.steps;
      for (const auto & r : reports) {
        epoch_loss += r.total;
      }
      step_log.write(step_json(epoch, result.steps, lr, reports));
    }
    for (const auto * p : store.all()) {
      for (double v : p->value.values()) {
        if (!std::isfinite(v)) {
          abort(epoch, "non-finite parameter '" + p->name + "' after update");
          return result;
        }
      }
    }

    EpochRecord rec;
    rec.epoch = epoch;
    rec.train_loss = epoch_loss / static_cast<double>(train_set.size());
    rec.lr = lr;
    try {
      rec.validation = evaluate(m, val, cfg.loss, cfg.train.val_limit);
    } catch (const NumericError & e) {
      abort(epoch, std::string("validation: ") + e.what());
      return result;
    }
    rec.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    snapshot();
    if (write) {
      nc::save_checkpoint(checkpoint, store, checkpoint_metadata(cfg, epoch));
    }
    epoch_log.write(rec.to_json());
    const auto & v6 = rec.validation.mean.values.back();
    spdlog::info(
      "epoch {}/{} loss {:.4f} val minADE_{} {:.4f} minFDE_{} {:.4f} ({:.1f} s)", epoch, cfg.train.epochs,
      rec.train_loss, v6.k, v6.min_ade, v6.k, v6.min_fde, rec.seconds);
    result.final_train_loss = rec.train_loss;
    result.history.push_back(std::move(rec));
  }
  if (write) {
    Json summary = {{"steps", result.steps}, {"final_train_loss", result.final_train_loss},
                    {"validation", result.history.back().validation.to_json()}};
    scene::write_text(out_dir / "summary.json", summary.dump(2) + "\n");
  }
  return result;
}

LoadedModel load_model(const std::filesystem::path & checkpoint)
{
  const auto ckpt = nc::load_checkpoint(checkpoint);
  Json meta;
  try {
    meta = Json::parse(ckpt.metadata);
  } catch (const Json::parse_error & e) {
    throw ParseError(checkpoint.string() + ": metadata is not JSON: " + e.what());
  }
  if (!meta.is_object() || meta.value("format", "") != "polarcast-checkpoint" || !meta.contains("config")) {
    throw ParseError(checkpoint.string() + ": not a polarcast model checkpoint");
  }
  LoadedModel out;
  out.config = run_config_from_json(meta.at("config"));
  out.model = std::make_unique<model::TrajectoryModel>(out.config.model);
  nc::restore(out.model->parameters(), ckpt);
  return out;
}

}  // namespace polarcast::app
