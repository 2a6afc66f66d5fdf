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

#ifndef POLARCAST__SCENE__IO_HPP_
#define POLARCAST__SCENE__IO_HPP_

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "polarcast/scene/bundle.hpp"
#include "polarcast/scene/scene.hpp"

// Dataset layout:
//
//   <dir>/manifest.json        {"format": "polarcast-scenes", "version": 1,
//                               "count": n, "shards": [{"file", "count"}],
//                               "units": {...}, "config": {...}}
//   <dir>/scenes/shard_0000.jsonl
//
// Each shard line is one scene object. Distances are meters, angles radians,
// times seconds. Lanes are flattened [num_lanes * lane_len] rows of
// [r, cos, sin]; agents [num_agents * hist_len] rows of the 10 motion
// channels; ground truth [num_aoi * fut_len] rows of [r, theta].

namespace polarcast::scene
{

using Json = nlohmann::json;

Json scene_to_json(const Scene & s);
// Throws ParseError for missing or mistyped fields, ValidationError for
// violated invariants. `context` prefixes messages (e.g. "file:line").
Scene scene_from_json(const Json & j, const std::string & context = "scene");

Json bundle_to_json(const TrajectoryBundle & b);
TrajectoryBundle bundle_from_json(const Json & j, const std::string & context = "bundle");

void write_scenes_jsonl(const std::filesystem::path & file, const std::vector<Scene> & scenes);
std::vector<Scene> read_scenes_jsonl(const std::filesystem::path & file);

// Writes manifest and shards; `config` is stored verbatim in the manifest.
void write_dataset(
  const std::filesystem::path & dir, const std::vector<Scene> & scenes, const Json & config,
  std::size_t shard_size = 500);
std::vector<Scene> read_dataset(const std::filesystem::path & dir);
Json read_manifest(const std::filesystem::path & dir);

void write_bundles(const std::filesystem::path & file, const std::vector<TrajectoryBundle> & bundles);
std::vector<TrajectoryBundle> read_bundles(const std::filesystem::path & file);

// Whole-file helpers that throw ParseError on IO failure.
std::string read_text(const std::filesystem::path & file);
void write_text(const std::filesystem::path & file, const std::string & text);

}  // namespace polarcast::scene

#endif  // POLARCAST__SCENE__IO_HPP_
