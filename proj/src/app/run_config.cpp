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

#include "polarcast/app/run_config.hpp"

#include "polarcast/error.hpp"
#include "polarcast/scene/io.hpp"

namespace polarcast::app
{

namespace
{

Json generator_to_json(const scene::GeneratorConfig & g)
{
  return {
    {"hist_len", g.hist_len},
    {"fut_len", g.fut_len},
    {"dt", g.dt},
    {"lane_len", g.lane_len},
    {"max_agents", g.max_agents},
    {"max_lanes", g.max_lanes},
    {"noise", g.noise},
    {"min_speed", g.min_speed},
    {"max_speed", g.max_speed},
    {"min_turn", g.min_turn},
    {"max_turn", g.max_turn},
    {"lane_width", g.lane_width},
    {"turn_lane_prob", g.turn_lane_prob},
    {"mix", g.mix},
  };
}

// Reads known keys of `j` into fields and rejects keys absent from `known`.
class Reader
{
public:
  Reader(const Json & j, const Json & known, std::string section) : j_(j), section_(std::move(section))
  {
    if (!j.is_object()) {
      throw ConfigError(section_ + ": expected a JSON object");
    }
    for (const auto & [key, value] : j.items()) {
      if (!known.contains(key)) {
        throw ConfigError(section_ + ": unknown field '" + key + "'");
      }
    }
  }

  template <typename T>
  void operator()(const char * key, T & field) const
  {
    if (!j_.contains(key)) {
      return;
    }
    try {
      j_.at(key).get_to(field);
    } catch (const Json::exception & e) {
      throw ConfigError(section_ + "." + key + ": " + e.what());
    }
  }

  bool has(const char * key) const { return j_.contains(key); }
  const Json & at(const char * key) const { return j_.at(key); }

private:
  const Json & j_;
  std::string section_;
};

scene::GeneratorConfig generator_from_json(const Json & j)
{
  scene::GeneratorConfig g;
  const Reader read(j, generator_to_json(g), "data.generator");
  read("hist_len", g.hist_len);
  read("fut_len", g.fut_len);
  read("dt", g.dt);
  read("lane_len", g.lane_len);
  read("max_agents", g.max_agents);
  read("max_lanes", g.max_lanes);
  read("noise", g.noise);
  read("min_speed", g.min_speed);
  read("max_speed", g.max_speed);
  read("min_turn", g.min_turn);
  read("max_turn", g.max_turn);
  read("lane_width", g.lane_width);
  read("turn_lane_prob", g.turn_lane_prob);
  read("mix", g.mix);
  return g;
}

Json train_to_json(const TrainConfig & t)
{
  return {
    {"epochs", t.epochs},
    {"batch_size", t.batch_size},
    {"lr", t.lr},
    {"weight_decay", t.weight_decay},
    {"warmup_epochs", t.warmup_epochs},
    {"clip_norm", t.clip_norm},
    {"seed", t.seed},
    {"val_fraction", t.val_fraction},
    {"val_limit", t.val_limit},
  };
}

Json loss_to_json(const objective::LossConfig & l)
{
  return {{"branches", objective::to_string(l.branches)}, {"all_refine_stages", l.all_refine_stages}};
}

Json data_to_json(const DataConfig & d)
{
  return {
    {"kind", scene::to_string(d.kind)},
    {"count", d.count},
    {"seed", d.seed},
    {"generator", generator_to_json(d.generator)},
  };
}

}  // namespace

void RunConfig::validate() const
{
  model.validate();
  data.generator.validate();
  if (train.epochs < 1 || train.batch_size < 1) {
    throw ConfigError("train: epochs and batch_size must be >= 1");
  }
  if (!(train.lr > 0.0) || train.weight_decay < 0.0) {
    throw ConfigError("train: lr must be positive and weight_decay non-negative");
  }
  if (!(train.val_fraction >= 0.0 && train.val_fraction < 1.0)) {
    throw ConfigError("train: val_fraction must lie in [0, 1)");
  }
  if (data.count < 1) {
    throw ConfigError("data: count must be >= 1");
  }
  const auto & g = data.generator;
  if (model.hist_len != g.hist_len || model.fut_len != g.fut_len || model.lane_len != g.lane_len) {
    throw ConfigError(
      "model and data disagree on sequence lengths (model hist/fut/lane " + std::to_string(model.hist_len) + "/" +
      std::to_string(model.fut_len) + "/" + std::to_string(model.lane_len) + ", data " + std::to_string(g.hist_len) +
      "/" + std::to_string(g.fut_len) + "/" + std::to_string(g.lane_len) + ")");
  }
}

Json to_json(const RunConfig & c)
{
  return {
    {"model", model::to_json(c.model)},
    {"loss", loss_to_json(c.loss)},
    {"train", train_to_json(c.train)},
    {"data", data_to_json(c.data)},
  };
}

RunConfig run_config_from_json(const Json & j)
{
  RunConfig c;
  const Reader top(j, to_json(c), "config");
  if (top.has("model")) {
    c.model = model::model_config_from_json(top.at("model"));
  }
  if (top.has("loss")) {
    const Reader read(top.at("loss"), loss_to_json(c.loss), "loss");
    read("all_refine_stages", c.loss.all_refine_stages);
    if (read.has("branches")) {
      std::string b;
      read("branches", b);
      c.loss.branches = objective::parse_loss_branches(b);
    }
  }
  if (top.has("train")) {
    const Reader read(top.at("train"), train_to_json(c.train), "train");
    read("epochs", c.train.epochs);
    read("batch_size", c.train.batch_size);
    read("lr", c.train.lr);
    read("weight_decay", c.train.weight_decay);
    read("warmup_epochs", c.train.warmup_epochs);
    read("clip_norm", c.train.clip_norm);
    read("seed", c.train.seed);
    read("val_fraction", c.train.val_fraction);
    read("val_limit", c.train.val_limit);
  }
  if (top.has("data")) {
    const Reader read(top.at("data"), data_to_json(c.data), "data");
    read("count", c.data.count);
    read("seed", c.data.seed);
    if (read.has("kind")) {
      std::string k;
      read("kind", k);
      c.data.kind = scene::parse_scenario_kind(k);
    }
    if (read.has("generator")) {
      c.data.generator = generator_from_json(read.at("generator"));
    }
  }
  c.validate();
  return c;
}

RunConfig load_run_config(const std::filesystem::path & path)
{
  const std::string text = scene::read_text(path);
  Json j;
  try {
    j = Json::parse(text);
  } catch (const Json::parse_error & e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
  return run_config_from_json(j);
}

void apply_override(Json & doc, const std::string & assignment)
{
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) {
    throw ConfigError("override '" + assignment + "' is not of the form section.key=value");
  }
  const std::string path = assignment.substr(0, eq);
  const std::string text = assignment.substr(eq + 1);
  Json * node = &doc;
  std::size_t start = 0;
  while (true) {
    const auto dot = path.find('.', start);
    const std::string key = path.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
    if (!node->is_object() || !node->contains(key)) {
      throw ConfigError("override '" + assignment + "': unknown field '" + path + "'");
    }
    node = &(*node)[key];
    if (dot == std::string::npos) {
      break;
    }
    start = dot + 1;
  }
  Json value = Json::parse(text, nullptr, false);
  if (value.is_discarded()) {
    value = text;
  }
  if (node->is_string() && !value.is_string()) {
    value = text;
  }
  *node = value;
}

std::vector<std::string> differing_fields(const Json & a, const Json & b, const std::string & prefix)
{
  std::vector<std::string> out;
  if (a.is_object() && b.is_object()) {
    for (const auto & [key, value] : a.items()) {
      const std::string path = prefix.empty() ? key : prefix + "." + key;
      if (!b.contains(key)) {
        out.push_back(path);
      } else {
        auto sub = differing_fields(value, b.at(key), path);
        out.insert(out.end(), sub.begin(), sub.end());
      }
    }
    for (const auto & [key, value] : b.items()) {
      if (!a.contains(key)) {
        out.push_back(prefix.empty() ? key : prefix + "." + key);
      }
    }
  } else if (a != b) {
    out.push_back(prefix);
  }
  return out;
}

}  // namespace polarcast::app
