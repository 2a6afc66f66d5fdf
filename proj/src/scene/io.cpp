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

#include "polarcast/scene/io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "polarcast/error.hpp"

namespace polarcast::scene
{

namespace fs = std::filesystem;

namespace
{

const Json & field(const Json & j, const char * name, const std::string & ctx)
{
  if (!j.is_object()) {
    throw ParseError(ctx + ": expected an object");
  }
  auto it = j.find(name);
  if (it == j.end()) {
    throw ParseError(ctx + ": missing field '" + name + "'");
  }
  return *it;
}

template <typename T>
T get(const Json & j, const char * name, const std::string & ctx)
{
  const Json & v = field(j, name, ctx);
  try {
    return v.get<T>();
  } catch (const nlohmann::json::exception & e) {
    throw ParseError(ctx + ": field '" + name + "': " + e.what());
  }
}

std::vector<double> row(const Json & j, std::size_t width, const std::string & ctx)
{
  if (!j.is_array() || j.size() != width) {
    throw ParseError(ctx + ": expected an array of " + std::to_string(width) + " numbers");
  }
  std::vector<double> out(width);
  for (std::size_t i = 0; i < width; ++i) {
    if (!j[i].is_number()) {
      throw ParseError(ctx + ": expected a number at position " + std::to_string(i));
    }
    out[i] = j[i].get<double>();
  }
  return out;
}

const Json & array_field(const Json & j, const char * name, const std::string & ctx)
{
  const Json & v = field(j, name, ctx);
  if (!v.is_array()) {
    throw ParseError(ctx + ": field '" + name + "' must be an array");
  }
  return v;
}

}  // namespace

Json scene_to_json(const Scene & s)
{
  Json j;
  j["id"] = s.id;
  j["kind"] = to_string(s.kind);
  j["dt"] = s.dt;
  j["hist_len"] = s.hist_len;
  j["fut_len"] = s.fut_len;
  j["lane_len"] = s.lane_len;
  j["frame"] = {s.frame.x, s.frame.y, s.frame.heading};
  Json lanes = Json::array();
  for (const auto & p : s.lanes) {
    lanes.push_back({p.r, p.cos_theta, p.sin_theta});
  }
  j["lanes"] = std::move(lanes);
  j["lane_mask"] = s.lane_mask;
  Json agents = Json::array();
  for (const auto & a : s.agents) {
    agents.push_back(a.channels());
  }
  j["agents"] = std::move(agents);
  j["aoi"] = s.aoi;
  Json gt = Json::array();
  for (const auto & p : s.ground_truth) {
    gt.push_back({p.r, p.theta});
  }
  j["ground_truth"] = std::move(gt);
  return j;
}

Scene scene_from_json(const Json & j, const std::string & ctx)
{
  Scene s;
  s.id = get<std::string>(j, "id", ctx);
  try {
    s.kind = parse_scenario_kind(get<std::string>(j, "kind", ctx));
  } catch (const ConfigError & e) {
    throw ParseError(ctx + ": field 'kind': " + e.what());
  }
  s.dt = get<double>(j, "dt", ctx);
  s.hist_len = get<std::size_t>(j, "hist_len", ctx);
  s.fut_len = get<std::size_t>(j, "fut_len", ctx);
  s.lane_len = get<std::size_t>(j, "lane_len", ctx);
  const auto frame = row(field(j, "frame", ctx), 3, ctx + ": field 'frame'");
  s.frame = {frame[0], frame[1], frame[2]};

  const Json & lanes = array_field(j, "lanes", ctx);
  for (std::size_t i = 0; i < lanes.size(); ++i) {
    const auto v = row(lanes[i], 3, ctx + ": field 'lanes[" + std::to_string(i) + "]'");
    s.lanes.push_back({v[0], v[1], v[2]});
  }
  s.lane_mask = get<std::vector<std::uint8_t>>(j, "lane_mask", ctx);
  const Json & agents = array_field(j, "agents", ctx);
  for (std::size_t i = 0; i < agents.size(); ++i) {
    const auto v = row(agents[i], kAgentChannels, ctx + ": field 'agents[" + std::to_string(i) + "]'");
    std::array<double, kAgentChannels> c{};
    std::copy(v.begin(), v.end(), c.begin());
    s.agents.push_back(MotionState::from_channels(c));
  }
  s.aoi = get<std::vector<std::size_t>>(j, "aoi", ctx);
  const Json & gt = array_field(j, "ground_truth", ctx);
  for (std::size_t i = 0; i < gt.size(); ++i) {
    const auto v = row(gt[i], 2, ctx + ": field 'ground_truth[" + std::to_string(i) + "]'");
    s.ground_truth.push_back({v[0], v[1]});
  }
  try {
    s.validate();
  } catch (const ValidationError & e) {
    throw ValidationError(ctx + ": " + e.what());
  }
  return s;
}

Json bundle_to_json(const TrajectoryBundle & b)
{
  Json j;
  j["modes"] = b.modes;
  j["agents"] = b.agents;
  j["steps"] = b.steps;
  j["stage"] = b.stage;
  Json traj = Json::array();
  for (const auto & p : b.traj) {
    traj.push_back({p.r, p.theta});
  }
  j["traj"] = std::move(traj);
  j["probs"] = b.probs;
  return j;
}

TrajectoryBundle bundle_from_json(const Json & j, const std::string & ctx)
{
  TrajectoryBundle b;
  b.modes = get<std::size_t>(j, "modes", ctx);
  b.agents = get<std::size_t>(j, "agents", ctx);
  b.steps = get<std::size_t>(j, "steps", ctx);
  b.stage = get<std::string>(j, "stage", ctx);
  const Json & traj = array_field(j, "traj", ctx);
  for (std::size_t i = 0; i < traj.size(); ++i) {
    const auto v = row(traj[i], 2, ctx + ": field 'traj[" + std::to_string(i) + "]'");
    b.traj.push_back({v[0], v[1]});
  }
  b.probs = get<std::vector<double>>(j, "probs", ctx);
  try {
    b.validate();
  } catch (const ValidationError & e) {
    throw ValidationError(ctx + ": " + e.what());
  }
  return b;
}

std::string read_text(const fs::path & file)
{
  std::ifstream in(file, std::ios::binary);
  if (!in) {
    throw ParseError("cannot open " + file.string());
  }
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const fs::path & file, const std::string & text)
{
  if (file.has_parent_path()) {
    fs::create_directories(file.parent_path());
  }
  std::ofstream out(file, std::ios::binary | std::ios::trunc);
  out << text;
  if (!out) {
    throw ParseError("cannot write " + file.string());
  }
}

namespace
{

template <typename T, typename Encode>
void write_jsonl(const fs::path & file, const std::vector<T> & items, Encode encode)
{
  std::string text;
  for (const auto & item : items) {
    text += encode(item).dump();
    text += '\n';
  }
  write_text(file, text);
}

template <typename Decode>
auto read_jsonl(const fs::path & file, Decode decode)
{
  const std::string text = read_text(file);
  std::vector<decltype(decode(Json(), std::string()))> out;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    const bool terminated = end != std::string::npos;
    if (!terminated) {
      end = text.size();
    }
    ++line_no;
    const std::string line = text.substr(pos, end - pos);
    pos = end + 1;
    if (line.empty()) {
      continue;
    }
    const std::string ctx = file.string() + ":" + std::to_string(line_no);
    Json j;
    try {
      j = Json::parse(line);
    } catch (const nlohmann::json::parse_error & e) {
      throw ParseError(ctx + ": malformed JSON (" + e.what() + ")");
    }
    if (!terminated) {
      throw ParseError(ctx + ": truncated record (missing newline)");
    }
    out.push_back(decode(j, ctx));
  }
  return out;
}

}  // namespace

void write_scenes_jsonl(const fs::path & file, const std::vector<Scene> & scenes)
{
  write_jsonl(file, scenes, scene_to_json);
}

std::vector<Scene> read_scenes_jsonl(const fs::path & file)
{
  return read_jsonl(file, [](const Json & j, const std::string & ctx) { return scene_from_json(j, ctx); });
}

void write_bundles(const fs::path & file, const std::vector<TrajectoryBundle> & bundles)
{
  write_jsonl(file, bundles, bundle_to_json);
}

std::vector<TrajectoryBundle> read_bundles(const fs::path & file)
{
  return read_jsonl(file, [](const Json & j, const std::string & ctx) { return bundle_from_json(j, ctx); });
}

void write_dataset(const fs::path & dir, const std::vector<Scene> & scenes, const Json & config, std::size_t shard_size)
{
  if (shard_size == 0) {
    throw ConfigError("write_dataset: shard_size must be positive");
  }
  Json manifest;
  manifest["format"] = "polarcast-scenes";
  manifest["version"] = 1;
  manifest["count"] = scenes.size();
  manifest["units"] = {{"distance", "m"}, {"angle", "rad"}, {"time", "s"}};
  manifest["config"] = config;
  Json shards = Json::array();
  for (std::size_t start = 0, idx = 0; start < scenes.size() || idx == 0; start += shard_size, ++idx) {
    const std::size_t end = std::min(scenes.size(), start + shard_size);
    char name[32];
    std::snprintf(name, sizeof(name), "shard_%04zu.jsonl", idx);
    const std::string rel = std::string("scenes/") + name;
    write_scenes_jsonl(
      dir / rel, std::vector<Scene>(scenes.begin() + static_cast<std::ptrdiff_t>(start),
                                     scenes.begin() + static_cast<std::ptrdiff_t>(end)));
    shards.push_back({{"file", rel}, {"count", end - start}});
    if (end == scenes.size()) {
      break;
    }
  }
  manifest["shards"] = std::move(shards);
  write_text(dir / "manifest.json", manifest.dump(2) + "\n");
}

Json read_manifest(const fs::path & dir)
{
  const fs::path file = dir / "manifest.json";
  Json m;
  try {
    m = Json::parse(read_text(file));
  } catch (const nlohmann::json::parse_error & e) {
    throw ParseError(file.string() + ": malformed JSON (" + e.what() + ")");
  }
  const std::string ctx = file.string();
  if (get<std::string>(m, "format", ctx) != "polarcast-scenes") {
    throw ParseError(ctx + ": field 'format': not a polarcast scene dataset");
  }
  if (get<int>(m, "version", ctx) != 1) {
    throw ParseError(ctx + ": field 'version': unsupported version");
  }
  array_field(m, "shards", ctx);
  return m;
}

std::vector<Scene> read_dataset(const fs::path & dir)
{
  const Json m = read_manifest(dir);
  const std::string ctx = (dir / "manifest.json").string();
  std::vector<Scene> out;
  for (const auto & shard : m["shards"]) {
    const auto file = get<std::string>(shard, "file", ctx + ": shard");
    auto part = read_scenes_jsonl(dir / file);
    if (part.size() != get<std::size_t>(shard, "count", ctx + ": shard")) {
      throw ParseError(ctx + ": shard " + file + " holds " + std::to_string(part.size()) +
                       " scenes, manifest says " + std::to_string(shard["count"].get<std::size_t>()));
    }
    for (auto & s : part) {
      out.push_back(std::move(s));
    }
  }
  if (out.size() != get<std::size_t>(m, "count", ctx)) {
    throw ParseError(ctx + ": field 'count' does not match the shards");
  }
  return out;
}

}  // namespace polarcast::scene
