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

#ifndef POLARCAST__EVALKIT__PLOT_HPP_
#define POLARCAST__EVALKIT__PLOT_HPP_

#include <filesystem>
#include <string>

#include "polarcast/scene/bundle.hpp"
#include "polarcast/scene/scene.hpp"

namespace polarcast::evalkit
{

struct PlotOptions
{
  double pixels_per_meter = 6.0;
  double margin = 10.0;
  // Draw the ground-truth future when the scene carries one.
  bool ground_truth = true;
};

/**
 * @brief SVG of a scene in the agent frame: lanes in grey, observed agent
 * histories in blue, predicted modes in orange with opacity scaled by
 * probability and the ground truth in green. Each prediction end carries
 * its probability as a label.
 */
std::string render_svg(const scene::Scene & s, const scene::TrajectoryBundle & b, const PlotOptions & options = {});

void write_svg(
  const std::filesystem::path & path, const scene::Scene & s, const scene::TrajectoryBundle & b,
  const PlotOptions & options = {});

}  // namespace polarcast::evalkit

#endif  // POLARCAST__EVALKIT__PLOT_HPP_
