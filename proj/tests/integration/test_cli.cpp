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
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

namespace fs = std::filesystem;
using Json = nlohmann::json;

namespace
{

const fs::path kRoot = fs::temp_directory_path() / "polarcast_test_cli";

struct Run
{
  int code = 0;
  std::string out;
  std::string err;
};

std::string slurp(const fs::path & p)
{
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Run cli(const std::string & args)
{
  const auto out = kRoot / "stdout.txt";
  const auto err = kRoot / "stderr.txt";
  const std::string cmd = "POLARCAST_LOG=warn " + std::string(POLARCAST_CLI) + " " + args + " >" + out.string() +
                          " 2>" + err.string();
  const int status = std::system(cmd.c_str());
  return {WEXITSTATUS(status), slurp(out), slurp(err)};
}

// Small model and matching generator so every command runs in seconds.
fs::path tiny_config()
{
  const Json j = {
    {"model",
     {{"hidden", 16}, {"heads", 2}, {"hist_len", 8}, {"fut_len", 6}, {"lane_len", 5}, {"agent_blocks", 1},
      {"encoder_layers", 1}, {"decoder_layers", 1}, {"refine_layers", 1}, {"refine_depth", 1}}},
    {"train", {{"epochs", 1}, {"batch_size", 4}, {"warmup_epochs", 0}}},
    {"data",
     {{"count", 10},
      {"generator", {{"hist_len", 8}, {"fut_len", 6}, {"lane_len", 5}, {"max_agents", 3}, {"max_lanes", 4}}}}},
  };
  const auto p = kRoot / "tiny.json";
  std::ofstream(p) << j.dump(2);
  return p;
}

std::vector<std::string> lines(const std::string & text)
{
  std::vector<std::string> out;
  std::istringstream in(text);
  for (std::string l; std::getline(in, l);) {
    out.push_back(l);
  }
  return out;
}

std::vector<double> row_values(const std::string & row)
{
  std::vector<double> v;
  std::istringstream in(row);
  std::string cell;
  std::getline(in, cell, ',');
  while (std::getline(in, cell, ',')) {
    v.push_back(std::stod(cell));
  }
  return v;
}

struct Fixture
{
  fs::path config;
  fs::path train = kRoot / "train";
  fs::path val = kRoot / "val";

  Fixture()
  {
    fs::remove_all(kRoot);
    fs::create_directories(kRoot);
    config = tiny_config();
    REQUIRE(cli("generate --config " + config.string() + " --out " + train.string() + " --seed 1").code == 0);
    REQUIRE(
      cli("generate --config " + config.string() + " --out " + val.string() + " --seed 2 --count 4").code == 0);
  }
};

}  // namespace

TEST_CASE("generate writes the requested scenes and is byte-for-byte reproducible")
{
  Fixture f;
  const auto a = kRoot / "g100a";
  const auto b = kRoot / "g100b";
  REQUIRE(cli("generate --config " + f.config.string() + " --count 100 --seed 9 --out " + a.string()).code == 0);
  REQUIRE(cli("generate --config " + f.config.string() + " --count 100 --seed 9 --out " + b.string()).code == 0);
  const auto manifest = Json::parse(slurp(a / "manifest.json"));
  CHECK(manifest["count"] == 100);
  std::size_t scenes = 0;
  for (const auto & shard : manifest["shards"]) {
    scenes += lines(slurp(a / shard["file"].get<std::string>())).size();
    CHECK(slurp(a / shard["file"].get<std::string>()) == slurp(b / shard["file"].get<std::string>()));
  }
  CHECK(scenes == 100);
  CHECK(slurp(a / "manifest.json") == slurp(b / "manifest.json"));
}

TEST_CASE("invalid input exits nonzero with a message on stderr")
{
  Fixture f;
  auto r = cli("generate --kind zigzag --out " + (kRoot / "bad").string());
  CHECK(r.code != 0);
  CHECK(r.err.find("zigzag") != std::string::npos);
  r = cli("train --data " + f.train.string() + " --out " + (kRoot / "x").string() + " --set model.hiden=3");
  CHECK(r.code == 2);
  CHECK(r.err.find("model.hiden") != std::string::npos);
  r = cli("frobnicate");
  CHECK(r.code != 0);
}

TEST_CASE("train, eval, plots and ensembles")
{
  Fixture f;
  const auto run = kRoot / "run";
  const auto train_args = "train --config " + f.config.string() + " --data " + f.train.string() + " --val " +
                          f.val.string() + " --out ";
  auto r = cli(train_args + run.string());
  REQUIRE(r.code == 0);
  for (const char * file : {"checkpoint.pcck", "config.json", "train_log.jsonl", "epochs.jsonl", "summary.json"}) {
    CHECK(fs::exists(run / file));
  }
  REQUIRE(cli(train_args + (kRoot / "run2").string()).code == 0);
  CHECK(
    Json::parse(slurp(run / "summary.json"))["final_train_loss"] ==
    Json::parse(slurp(kRoot / "run2" / "summary.json"))["final_train_loss"]);

  const auto ckpt = (run / "checkpoint.pcck").string();
  const auto csv = kRoot / "metrics.csv";
  const auto plots = kRoot / "plots";
  r = cli(
    "eval --checkpoint " + ckpt + " --data " + f.val.string() + " --metrics-csv " + csv.string() + " --plot-svg " +
    plots.string());
  REQUIRE(r.code == 0);
  const auto rows = lines(slurp(csv));
  REQUIRE(rows.size() == 6);
  CHECK(rows[0] == "scene,minADE_1,minFDE_1,MR_1,b-minFDE_1,minADE_6,minFDE_6,MR_6,b-minFDE_6");
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const auto v = row_values(rows[i]);
    REQUIRE(v.size() == 8);
    for (double x : v) {
      CHECK(std::isfinite(x));
    }
  }
  std::size_t svgs = 0;
  for (const auto & e : fs::directory_iterator(plots)) {
    const auto text = slurp(e.path());
    CHECK(text.rfind("<?xml", 0) == 0);
    CHECK(text.find("</svg>") != std::string::npos);
    ++svgs;
  }
  CHECK(svgs == 4);

  std::string members;
  for (int i = 0; i < 7; ++i) {
    members += " " + ckpt;
  }
  const auto ens_csv = kRoot / "ensemble.csv";
  r = cli("eval --ensemble" + members + " --data " + f.val.string() + " --metrics-csv " + ens_csv.string());
  REQUIRE(r.code == 0);
  const auto single = row_values(lines(slurp(csv)).back());
  const auto merged = row_values(lines(slurp(ens_csv)).back());
  REQUIRE(single.size() == merged.size());
  for (std::size_t i = 0; i < single.size(); ++i) {
    CHECK(std::abs(single[i] - merged[i]) <= 1e-9);
  }

  Json other = Json::parse(slurp(f.config));
  other["model"]["hidden"] = 8;
  other["model"]["refine_depth"] = 2;
  std::ofstream(kRoot / "other.json") << other.dump();
  r = cli("eval --checkpoint " + ckpt + " --data " + f.val.string() + " --config " + (kRoot / "other.json").string());
  CHECK(r.code == 2);
  CHECK(r.err.find("model.hidden") != std::string::npos);
  CHECK(r.err.find("model.refine_depth") != std::string::npos);

  r = cli("eval --baseline --data " + f.val.string());
  CHECK(r.code == 0);
  CHECK(r.out.find("k=6 minADE") != std::string::npos);
}

TEST_CASE("a diverging run exits with the numeric code and keeps the last good checkpoint")
{
  Fixture f;
  const auto run = kRoot / "nan";
  const auto r = cli(
    "train --config " + f.config.string() + " --data " + f.train.string() + " --val " + f.val.string() + " --out " +
    run.string() + " --set train.lr=1e30 --set train.clip_norm=0");
  CHECK(r.code == 4);
  CHECK(r.err.find("aborted") != std::string::npos);
  CHECK(fs::exists(run / "abort.json"));
  CHECK(fs::exists(run / "checkpoint.pcck"));
  CHECK(cli("eval --checkpoint " + (run / "checkpoint.pcck").string() + " --data " + f.val.string()).code == 0);
}

TEST_CASE("ablate trains one cell per grid point")
{
  Fixture f;
  const auto out = kRoot / "ablate";
  const auto r = cli(
    "ablate --config " + f.config.string() + " --data " + f.train.string() + " --val " + f.val.string() + " --out " +
    out.string() + " --grid model.refine_depth=0,1,2");
  REQUIRE(r.code == 0);
  const auto rows = lines(slurp(out / "ablation.csv"));
  REQUIRE(rows.size() == 4);
  CHECK(rows[0].rfind("cell,model.refine_depth,minADE_1", 0) == 0);
  CHECK(rows[1].rfind("0,0,", 0) == 0);
  CHECK(rows[3].rfind("2,2,", 0) == 0);
  for (int i = 0; i < 3; ++i) {
    CHECK(fs::exists(out / ("cell_" + std::to_string(i)) / "checkpoint.pcck"));
  }
}
