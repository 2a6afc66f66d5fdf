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

#include "polarcast/objective/fd_check.hpp"

#include <algorithm>
#include <limits>
#include <random>

#include "polarcast/error.hpp"
#include "polarcast/model/features.hpp"
#include "polarcast/model/model.hpp"
#include "polarcast/scene/generator.hpp"

namespace polarcast::objective
{

namespace
{

constexpr std::size_t kMaxHidden = 16;
constexpr std::size_t kMaxModes = 3;
constexpr std::size_t kMaxSteps = 5;
constexpr std::size_t kMaxElements = 3;

void require(bool ok, const std::string & what)
{
  if (!ok) {
    throw ConfigError("finite_difference_check: config is not tiny (" + what + ")");
  }
}

}  // namespace

model::ModelConfig tiny_config()
{
  model::ModelConfig c;
  c.hidden = 8;
  c.heads = 2;
  c.modes = 3;
  c.hist_len = 5;
  c.fut_len = 5;
  c.lane_len = 4;
  c.agent_blocks = 1;
  c.encoder_layers = 1;
  c.decoder_layers = 1;
  c.refine_layers = 1;
  c.refine_depth = 2;
  c.dropout = 0.0;
  c.detach_refinement = false;
  return c;
}

nc::GradCheckResult finite_difference_check(
  const model::ModelConfig & config, std::uint64_t seed, const FdCheckOptions & options)
{
  config.validate();
  if (config.dropout > 0.0) {
    throw ConfigError("finite_difference_check: stochastic layer active (dropout " +
                      std::to_string(config.dropout) + ")");
  }
  if (config.detach_refinement) {
    throw ConfigError("finite_difference_check: stop-gradient active (detach_refinement)");
  }
  require(config.hidden <= kMaxHidden, "hidden " + std::to_string(config.hidden) + " > 16");
  require(config.modes <= kMaxModes, "modes " + std::to_string(config.modes) + " > 3");
  require(config.hist_len <= kMaxSteps, "hist_len " + std::to_string(config.hist_len) + " > 5");
  require(config.fut_len <= kMaxSteps, "fut_len " + std::to_string(config.fut_len) + " > 5");

  scene::GeneratorConfig gen;
  gen.hist_len = config.hist_len;
  gen.fut_len = config.fut_len;
  gen.lane_len = config.lane_len;
  gen.max_agents = kMaxElements;
  gen.max_lanes = kMaxElements;
  const scene::Scene s = scene::generate_synthetic_scene(scene::ScenarioKind::kMixed, seed, gen).scene;
  const model::SceneInputs inputs = model::featurize(s, config);

  model::ModelConfig mc = config;
  mc.seed = seed;
  model::TrajectoryModel net(mc);
  std::mt19937_64 rng(seed ^ 0x6a09e667f3bcc908ULL);
  std::normal_distribution<double> noise(0.0, options.perturb);
  std::normal_distribution<double> redraw(0.0, options.reinit_zero);
  for (auto * p : net.parameters().all()) {
    const bool zero = std::all_of(p->value.data(), p->value.data() + p->value.size(), [](double v) { return v == 0.0; });
    for (std::size_t i = 0; i < p->value.size(); ++i) {
      p->value[i] += zero ? redraw(rng) : noise(rng);
    }
  }

  std::vector<std::vector<std::size_t>> winners;
  double base = 0.0;
  {
    nc::Graph g(false);
    auto out = net.forward(g, inputs);
    const LossReport report = total_loss(out.stages, s.ground_truth, options.loss).report;
    winners = report.winners;
    base = report.total;
  }
  const double floor =
    options.resolution * std::numeric_limits<double>::epsilon() * std::abs(base) / options.step;

  auto loss = [&](bool with_backward) {
    nc::Graph g(false);
    auto out = net.forward(g, inputs);
    nc::Var l = total_loss(out.stages, s.ground_truth, options.loss, &winners).total;
    if (with_backward) {
      g.backward(l);
    }
    return l.value()[0];
  };
  return nc::check_gradients(net.parameters(), loss, options.samples_per_tensor, seed, options.step, floor);
}

}  // namespace polarcast::objective
