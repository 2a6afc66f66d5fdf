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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>

#include "polarcast/app/commands.hpp"
#include "polarcast/app/run_config.hpp"
#include "polarcast/app/trainer.hpp"
#include "polarcast/error.hpp"
#include "polarcast/scene/io.hpp"

using namespace polarcast;
using namespace polarcast::app;

namespace
{

RunConfig tiny_run()
{
  RunConfig c;
  c.model.hidden = 16;
  c.model.heads = 2;
  c.model.hist_len = 8;
  c.model.fut_len = 6;
  c.model.lane_len = 5;
  c.model.agent_blocks = 1;
  c.model.encoder_layers = 1;
  c.model.decoder_layers = 1;
  c.model.refine_layers = 1;
  c.model.refine_depth = 1;
  c.data.generator.hist_len = 8;
  c.data.generator.fut_len = 6;
  c.data.generator.lane_len = 5;
  c.data.generator.max_agents = 3;
  c.data.generator.max_lanes = 4;
  c.data.count = 12;
  c.train.epochs = 2;
  c.train.batch_size = 4;
  c.train.warmup_epochs = 1;
  return c;
}

std::vector<scene::Scene> tiny_scenes(const RunConfig & c, std::size_t n, std::uint64_t seed)
{
  return scene::generate_dataset(c.data.kind, n, seed, c.data.generator);
}

std::filesystem::path temp_dir(const std::string & name)
{
  auto p = std::filesystem::temp_directory_path() / ("polarcast_test_app_" + name);
  std::filesystem::remove_all(p);
  return p;
}

}  // namespace

TEST_CASE("run config JSON round trip and unknown fields")
{
  auto c = tiny_run();
  c.loss.branches = objective::LossBranches::kPolar;
  c.data.kind = scene::ScenarioKind::kTurnLeft;
  c.data.generator.mix = scene::kTurningHeavyMix;
  const auto j = to_json(c);
  CHECK(to_json(run_config_from_json(j)) == j);

  auto bad = j;
  bad["train"]["epoch"] = 3;
  CHECK_THROWS_AS(run_config_from_json(bad), ConfigError);
  bad = j;
  bad["model"]["hist_len"] = 9;
  CHECK_THROWS_WITH_AS(run_config_from_json(bad), doctest::Contains("sequence lengths"), ConfigError);
  bad = j;
  bad["loss"]["branches"] = "spherical";
  CHECK_THROWS_AS(run_config_from_json(bad), ConfigError);
  CHECK(run_config_from_json(Json::object()).train.epochs == 30);
}

TEST_CASE("overrides parse JSON values and reject unknown paths")
{
  auto doc = to_json(RunConfig{});
  apply_override(doc, "model.hidden=32");
  apply_override(doc, "model.coords=cartesian-mod");
  apply_override(doc, "loss.all_refine_stages=false");
  apply_override(doc, "data.generator.mix=[0.1,0.4,0.4,0.1]");
  const auto c = run_config_from_json(doc);
  CHECK(c.model.hidden == 32);
  CHECK(c.model.coords == model::CoordinateMode::kCartesianMod);
  CHECK_FALSE(c.loss.all_refine_stages);
  CHECK(c.data.generator.mix[1] == 0.4);
  CHECK_THROWS_AS(apply_override(doc, "model.hiden=3"), ConfigError);
  CHECK_THROWS_AS(apply_override(doc, "hidden"), ConfigError);
  CHECK_THROWS_AS(apply_override(doc, "=3"), ConfigError);
}

TEST_CASE("differing fields name every changed leaf")
{
  auto a = to_json(RunConfig{});
  auto b = a;
  b["model"]["hidden"] = 8;
  b["train"]["lr"] = 0.5;
  const auto d = differing_fields(a, b);
  REQUIRE(d.size() == 2);
  CHECK(d[0] == "model.hidden");
  CHECK(d[1] == "train.lr");
  CHECK(differing_fields(a, a).empty());
}

TEST_CASE("grid axes split on top-level commas")
{
  auto [key, values] = parse_axis("data.generator.mix=[1,0,0,0],[0,1,0,0]");
  CHECK(key == "data.generator.mix");
  REQUIRE(values.size() == 2);
  CHECK(values[1] == "[0,1,0,0]");
  CHECK(parse_axis("model.refine_depth=0,1,2").second.size() == 3);
  CHECK_THROWS_AS(parse_axis("model.refine_depth"), ConfigError);
  CHECK_THROWS_AS(parse_axis("model.refine_depth=0,,1"), ConfigError);
}

TEST_CASE("training is deterministic and writes every artifact")
{
  const auto cfg = tiny_run();
  const auto train_set = tiny_scenes(cfg, 12, 1);
  const auto val = tiny_scenes(cfg, 4, 2);
  const auto dir = temp_dir("train");

  model::TrajectoryModel a(cfg.model);
  const auto ra = train(a, cfg, train_set, val, dir);
  model::TrajectoryModel b(cfg.model);
  const auto rb = train(b, cfg, train_set, val);
  CHECK_FALSE(ra.aborted);
  CHECK(ra.history.size() == 2);
  CHECK(ra.steps == 6);
  CHECK(ra.final_train_loss == rb.final_train_loss);
  CHECK(std::isfinite(ra.final_train_loss));

  for (const char * f : {"config.json", "train_log.jsonl", "epochs.jsonl", "checkpoint.pcck", "summary.json"}) {
    CHECK(std::filesystem::exists(dir / f));
  }
  const auto log = scene::read_text(dir / "train_log.jsonl");
  CHECK(std::count(log.begin(), log.end(), '\n') == 6);
  const auto first = Json::parse(log.substr(0, log.find('\n')));
  CHECK(first["loss"]["terms"].contains("proposal/polar/reg"));
  CHECK(Json::parse(scene::read_text(dir / "config.json")) == to_json(cfg));

  const auto loaded = load_model(dir / "checkpoint.pcck");
  CHECK(to_json(loaded.config) == to_json(cfg));
  CHECK(loaded.model->predict(val[0]) == a.predict(val[0]));
  std::filesystem::remove_all(dir);
}

TEST_CASE("a diverging run aborts and restores the last completed epoch")
{
  auto cfg = tiny_run();
  cfg.train.epochs = 3;
  cfg.train.lr = 1e30;
  cfg.train.warmup_epochs = 0;
  cfg.train.clip_norm = 0.0;
  const auto train_set = tiny_scenes(cfg, 8, 3);
  const auto val = tiny_scenes(cfg, 2, 4);
  const auto dir = temp_dir("abort");
  model::TrajectoryModel m(cfg.model);
  const auto r = train(m, cfg, train_set, val, dir);
  REQUIRE(r.aborted);
  CHECK_FALSE(r.diagnostic.empty());
  CHECK(std::filesystem::exists(dir / "abort.json"));
  const auto loaded = load_model(dir / "checkpoint.pcck");
  for (const auto * p : loaded.model->parameters().all()) {
    for (double v : p->value.values()) {
      REQUIRE(std::isfinite(v));
    }
  }
  for (const auto * p : m.parameters().all()) {
    for (double v : p->value.values()) {
      REQUIRE(std::isfinite(v));
    }
  }
  std::filesystem::remove_all(dir);
}

TEST_CASE("evaluation reports stage losses for every stage")
{
  const auto cfg = tiny_run();
  model::TrajectoryModel m(cfg.model);
  const auto ev = evaluate(m, tiny_scenes(cfg, 3, 5), cfg.loss);
  CHECK(ev.table.rows.size() == 3);
  CHECK(ev.stages.size() == 2);
  CHECK(ev.stage_loss_of(ev.stages.front()) > 0.0);
  CHECK_THROWS_AS(ev.stage_loss_of("nope"), ValidationError);
  CHECK(ev.mean.at(6).min_ade <= ev.mean.at(1).min_ade);
}

TEST_CASE("training rejects scenes of the wrong length")
{
  auto cfg = tiny_run();
  auto other = cfg;
  other.data.generator.fut_len = 7;
  model::TrajectoryModel m(cfg.model);
  CHECK_THROWS_AS(train(m, cfg, tiny_scenes(other, 2, 1), tiny_scenes(cfg, 1, 2)), ConfigError);
}
