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

#include "polarcast/model/heads.hpp"

#include <cmath>
#include <limits>

namespace polarcast::model
{

using nc::Tensor;
using nc::Var;

namespace
{

// Channel c of a [rows x steps*channels] head output as [rows x steps].
Var column(Var x, std::size_t rows, std::size_t steps, std::size_t channels, std::size_t c)
{
  return nc::reshape(nc::slice(nc::reshape(x, {rows, steps, channels}), 2, c, 1), {rows, steps});
}

// [K*N x 1] scores to [N x K] logits.
Var mode_logits(Var scores, std::size_t k, std::size_t n) { return nc::transpose(nc::reshape(scores, {k, n})); }

}  // namespace

StageOutput polar_stage(std::string stage, Var r, Var theta, Var logits, std::size_t k, std::size_t n)
{
  StageOutput s;
  s.stage = std::move(stage);
  s.modes = k;
  s.agents = n;
  s.steps = r.shape()[1];
  s.r = r;
  s.theta = theta;
  s.x = nc::mul(r, nc::cos(theta));
  s.y = nc::mul(r, nc::sin(theta));
  s.logits = logits;
  return s;
}

StageOutput cartesian_stage(std::string stage, Var x, Var y, Var logits, std::size_t k, std::size_t n)
{
  StageOutput s;
  s.stage = std::move(stage);
  s.modes = k;
  s.agents = n;
  s.steps = x.shape()[1];
  s.cartesian = true;
  s.x = x;
  s.y = y;
  s.r = nc::sqrt(nc::add(nc::square(x), nc::square(y)), 1e-12);
  s.theta = nc::atan2(y, x);
  s.logits = logits;
  return s;
}

scene::TrajectoryBundle StageOutput::bundle() const
{
  scene::TrajectoryBundle b(modes, agents, steps, stage);
  for (std::size_t i = 0; i < b.traj.size(); ++i) {
    if (cartesian) {
      b.traj[i] = geometry::cart_to_polar(x.value()[i], y.value()[i]);
    } else {
      const double r_i = r.value()[i];
      b.traj[i] = r_i < geometry::kOriginRadius ? geometry::PolarPoint{0.0, 0.0}
                                                : geometry::PolarPoint{r_i, geometry::wrap_angle(theta.value()[i])};
    }
  }
  const Tensor & lv = logits.value();
  for (std::size_t n = 0; n < agents; ++n) {
    double mx = -std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < modes; ++k) {
      mx = std::max(mx, lv[n * modes + k]);
    }
    double z = 0.0;
    for (std::size_t k = 0; k < modes; ++k) {
      z += std::exp(lv[n * modes + k] - mx);
    }
    for (std::size_t k = 0; k < modes; ++k) {
      b.prob(k, n) = std::exp(lv[n * modes + k] - mx) / z;
    }
  }
  return b;
}

Decoder Decoder::create(nc::ParameterStore & store, const std::string & name, const ModelConfig & c, nc::Rng & rng)
{
  Decoder d;
  d.config = c;
  d.mode_queries = &store.create(name + ".mode_queries", nc::normal_init({c.modes, c.hidden}, 1.0, rng));
  RetOptions opt{c.hidden, c.heads, c.coords, false, false, c.dropout};
  for (std::size_t i = 0; i < c.decoder_layers; ++i) {
    const std::string p = name + ".layer" + std::to_string(i);
    d.layers.push_back(
      {RelativeAttention::create(store, p + ".self", opt, false, rng),
       RelativeAttention::create(store, p + ".cross", opt, false, rng),
       nc::LayerNorm::create(store, p + ".ffn_norm", c.hidden),
       nc::Mlp::create(store, p + ".ffn", {c.hidden, 2 * c.hidden, c.hidden}, rng, c.dropout)});
  }
  const std::size_t out = c.coords == CoordinateMode::kPolar ? 3 : 2;
  d.trajectory = nc::Mlp::create(store, name + ".trajectory", {c.hidden, c.hidden, c.fut_len * out}, rng);
  d.probability = nc::Mlp::create(store, name + ".probability", {c.hidden, c.hidden, 1}, rng, 0.0, false);
  return d;
}

StageOutput Decoder::operator()(nc::Graph & g, const SceneContext & ctx, const std::vector<std::size_t> & aoi) const
{
  const std::size_t k = config.modes;
  const std::size_t n = aoi.size();
  const std::size_t rows = k * n;
  std::vector<std::size_t> mode_index(rows);
  std::vector<std::size_t> agent_row(rows);
  for (std::size_t i = 0; i < rows; ++i) {
    mode_index[i] = i / n;
    agent_row[i] = ctx.num_lanes + aoi[i % n];
  }
  Var q = nc::add(nc::gather(g.param(*mode_queries), mode_index), nc::gather(ctx.features, agent_row));

  nc::Mask same_agent(rows * rows);
  for (std::size_t a = 0; a < rows; ++a) {
    for (std::size_t b = 0; b < rows; ++b) {
      same_agent[a * rows + b] = a % n == b % n ? 1 : 0;
    }
  }
  const nc::Mask context = pair_mask(nc::Mask(rows, 1), ctx.mask);
  for (const auto & layer : layers) {
    q = nc::add(q, layer.self(g, q, q, Var(), same_agent, nullptr));
    q = nc::add(q, layer.cross(g, q, ctx.features, Var(), context, nullptr));
    q = nc::add(q, nc::dropout(layer.ffn(g, layer.ffn_norm(g, q)), config.dropout));
  }

  const std::size_t t = config.fut_len;
  Var traj = trajectory(g, q);
  Var logits = mode_logits(probability(g, q), k, n);
  if (config.coords == CoordinateMode::kPolar) {
    Var r = nc::scale(nc::softplus(column(traj, rows, t, 3, 0)), kLengthScale);
    Var theta = nc::atan2(column(traj, rows, t, 3, 1), column(traj, rows, t, 3, 2));
    return polar_stage("proposal", r, theta, logits, k, n);
  }
  return cartesian_stage(
    "proposal", nc::scale(column(traj, rows, t, 2, 0), kLengthScale), nc::scale(column(traj, rows, t, 2, 1), kLengthScale),
    logits, k, n);
}

RefineStage RefineStage::create(nc::ParameterStore & store, const std::string & name, const ModelConfig & c, nc::Rng & rng)
{
  RefineStage r;
  r.config = c;
  r.encode = nc::Mlp::create(store, name + ".encode", {c.fut_len * waypoint_channels(c.coords), c.hidden, c.hidden}, rng);
  RetOptions opt{c.hidden, c.heads, c.coords, c.relative_attention, c.relative_self_attention, c.dropout};
  for (std::size_t i = 0; i < c.refine_layers; ++i) {
    r.layers.push_back(RetLayer::create(store, name + ".ret" + std::to_string(i), opt, rng));
  }
  r.offset = nc::Mlp::create(store, name + ".offset", {c.hidden, c.hidden, c.fut_len * 2}, rng);
  r.offset.layers.back().zero();
  r.probability = nc::Mlp::create(store, name + ".probability", {c.hidden, c.hidden, 1}, rng, 0.0, false);
  return r;
}

Var trajectory_features(const StageOutput & s, CoordinateMode mode)
{
  const std::size_t rows = s.modes * s.agents;
  const nc::Shape column_shape{rows, s.steps, 1};
  std::vector<Var> parts;
  if (mode == CoordinateMode::kPolar) {
    parts = {
      nc::reshape(nc::scale(s.r, 1.0 / kLengthScale), column_shape), nc::reshape(nc::cos(s.theta), column_shape),
      nc::reshape(nc::sin(s.theta), column_shape)};
  } else {
    parts = {
      nc::reshape(nc::scale(s.x, 1.0 / kLengthScale), column_shape),
      nc::reshape(nc::scale(s.y, 1.0 / kLengthScale), column_shape)};
  }
  return nc::reshape(nc::concat(parts, 2), {rows, s.steps * waypoint_channels(mode)});
}

namespace
{

StageOutput detached(const StageOutput & s)
{
  if (s.cartesian) {
    return cartesian_stage(s.stage, nc::detach(s.x), nc::detach(s.y), nc::detach(s.logits), s.modes, s.agents);
  }
  return polar_stage(s.stage, nc::detach(s.r), nc::detach(s.theta), nc::detach(s.logits), s.modes, s.agents);
}

}  // namespace

KeypointVars endpoint_vars(const StageOutput & s)
{
  return {nc::slice(s.r, 1, s.steps - 1, 1), nc::slice(s.theta, 1, s.steps - 1, 1)};
}

std::vector<PolarPoint> stage_endpoints(const StageOutput & s, CoordinateMode mode)
{
  const std::size_t rows = s.modes * s.agents;
  std::vector<PolarPoint> out(rows);
  for (std::size_t i = 0; i < rows; ++i) {
    const std::size_t idx = i * s.steps + s.steps - 1;
    if (mode == CoordinateMode::kPolar) {
      const double r = s.r.value()[idx];
      out[i] = r < geometry::kOriginRadius ? PolarPoint{} : PolarPoint{r, geometry::wrap_angle(s.theta.value()[idx])};
    } else {
      out[i] = geometry::cart_to_polar(s.x.value()[idx], s.y.value()[idx]);
    }
  }
  return out;
}

StageOutput RefineStage::operator()(
  nc::Graph & g, const StageOutput & incoming, const SceneContext & ctx, const std::string & stage) const
{
  const StageOutput in = config.detach_refinement ? detached(incoming) : incoming;
  const std::size_t rows = in.modes * in.agents;
  const std::size_t t = in.steps;
  KeyedFeatures q{
    encode(g, trajectory_features(in, config.coords)), stage_endpoints(in, config.coords), nc::Mask(rows, 1),
    endpoint_vars(in)};
  const KeyedFeatures keys = ctx.keyed();
  for (const auto & layer : layers) {
    q.features = layer(g, q, keys);
  }
  Var off = offset(g, q.features);
  Var logits = mode_logits(probability(g, q.features), in.modes, in.agents);
  Var d0 = column(off, rows, t, 2, 0);
  Var d1 = column(off, rows, t, 2, 1);
  if (config.coords == CoordinateMode::kPolar) {
    Var r = nc::relu(nc::add(in.r, nc::scale(d0, kLengthScale)));
    Var theta = nc::wrap_angle(nc::add(in.theta, d1));
    return polar_stage(stage, r, theta, logits, in.modes, in.agents);
  }
  return cartesian_stage(
    stage, nc::add(in.x, nc::scale(d0, kLengthScale)), nc::add(in.y, nc::scale(d1, kLengthScale)), logits, in.modes,
    in.agents);
}

}  // namespace polarcast::model
