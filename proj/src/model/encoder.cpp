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

#include "polarcast/model/encoder.hpp"

#include <cmath>

#include "polarcast/error.hpp"

namespace polarcast::model
{

using nc::Tensor;
using nc::Var;

PointEncoder PointEncoder::create(
  nc::ParameterStore & store, const std::string & name, std::size_t in, std::size_t hidden, nc::Rng & rng)
{
  return {nc::Mlp::create(store, name, {in, hidden, hidden}, rng)};
}

Var PointEncoder::operator()(nc::Graph & g, const Tensor & points, const nc::Mask & mask) const
{
  return nc::masked_max_pool(mlp(g, g.constant(points)), mask);
}

Var diagonal_scan(Var decay, Var u, Var gate, const nc::Mask & mask)
{
  const auto & us = u.shape();
  if (us.size() != 3 || gate.shape() != us || decay.shape() != nc::Shape{us[2]}) {
    throw ShapeError(
      "diagonal_scan: decay " + nc::shape_str(decay.shape()) + ", input " + nc::shape_str(us) + ", gate " +
      nc::shape_str(gate.shape()));
  }
  const std::size_t n = us[0];
  const std::size_t t_len = us[1];
  const std::size_t c = us[2];
  if (mask.size() != n * t_len) {
    throw ShapeError("diagonal_scan: mask of " + std::to_string(mask.size()) + " entries for " + nc::shape_str(us));
  }
  const Tensor & a = decay.value();
  const Tensor & uv = u.value();
  const Tensor & gv = gate.value();
  Tensor h(us);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t t = 0; t < t_len; ++t) {
      const std::size_t row = (i * t_len + t) * c;
      double * ht = h.data() + row;
      const double * hp = t > 0 ? ht - c : nullptr;
      if (!mask[i * t_len + t]) {
        for (std::size_t k = 0; k < c; ++k) {
          ht[k] = hp ? hp[k] : 0.0;
        }
        continue;
      }
      for (std::size_t k = 0; k < c; ++k) {
        ht[k] = (hp ? a[k] * hp[k] : 0.0) + gv[row + k] * uv[row + k];
      }
    }
  }
  nc::Graph & g = *u.graph;
  return g.record(
    "diagonal_scan", std::move(h), {decay, u, gate}, [mask, n, t_len, c](const nc::BackwardContext & ctx) {
      const Tensor & a = *ctx.in_values[0];
      const Tensor & uv = *ctx.in_values[1];
      const Tensor & gv = *ctx.in_values[2];
      const Tensor & h = ctx.out_value;
      Tensor * ga = ctx.in_grads[0];
      Tensor * gu = ctx.in_grads[1];
      Tensor * gg = ctx.in_grads[2];
      std::vector<double> carry(c);
      for (std::size_t i = 0; i < n; ++i) {
        std::fill(carry.begin(), carry.end(), 0.0);
        for (std::size_t t = t_len; t-- > 0;) {
          const std::size_t row = (i * t_len + t) * c;
          const double * dy = ctx.out_grad.data() + row;
          for (std::size_t k = 0; k < c; ++k) {
            carry[k] += dy[k];
          }
          if (!mask[i * t_len + t]) {
            continue;
          }
          for (std::size_t k = 0; k < c; ++k) {
            if (gu) {
              (*gu)[row + k] += carry[k] * gv[row + k];
            }
            if (gg) {
              (*gg)[row + k] += carry[k] * uv[row + k];
            }
            if (t > 0) {
              if (ga) {
                (*ga)[k] += carry[k] * h[row - c + k];
              }
              carry[k] *= a[k];
            } else {
              carry[k] = 0.0;
            }
          }
        }
      }
    });
}

ScanBlock ScanBlock::create(
  nc::ParameterStore & store, const std::string & name, std::size_t hidden, SequenceCell cell, double dropout,
  nc::Rng & rng)
{
  ScanBlock b;
  b.cell = cell;
  b.dropout = dropout;
  b.norm = nc::LayerNorm::create(store, name + ".norm", hidden);
  if (cell == SequenceCell::kSsm) {
    b.input = nc::Linear::create(store, name + ".input", hidden, hidden, rng);
    b.gate = nc::Linear::create(store, name + ".gate", hidden, hidden, rng);
    // Decay rates spread over (0.6, 0.97) for a range of memory lengths.
    Tensor logit({hidden});
    std::uniform_real_distribution<double> d(std::log(0.6 / 0.4), std::log(0.97 / 0.03));
    for (auto & v : logit.values()) {
      v = d(rng);
    }
    b.decay_logit = &store.create(name + ".decay_logit", std::move(logit));
  } else {
    b.input = nc::Linear::create(store, name + ".input", hidden, 3 * hidden, rng);
    b.recurrent = nc::Linear::create(store, name + ".recurrent", hidden, 3 * hidden, rng, false);
  }
  b.output = nc::Linear::create(store, name + ".output", hidden, hidden, rng);
  return b;
}

Var ScanBlock::operator()(nc::Graph & g, Var x, const nc::Mask & mask) const
{
  const std::size_t n = x.shape()[0];
  const std::size_t t_len = x.shape()[1];
  const std::size_t c = x.shape()[2];
  Var xn = norm(g, x);
  Var h;
  if (cell == SequenceCell::kSsm) {
    Var decay = nc::sigmoid(g.param(*decay_logit));
    h = diagonal_scan(decay, input(g, xn), nc::sigmoid(gate(g, xn)), mask);
  } else {
    Var proj = input(g, xn);  // [N x T x 3C]
    Var state = g.constant(Tensor({n, c}));
    std::vector<Var> steps;
    for (std::size_t t = 0; t < t_len; ++t) {
      Var xt = nc::reshape(nc::slice(proj, 1, t, 1), {n, 3 * c});
      Var ht = recurrent(g, state);
      Var z = nc::sigmoid(nc::add(nc::slice(xt, 1, 0, c), nc::slice(ht, 1, 0, c)));
      Var r = nc::sigmoid(nc::add(nc::slice(xt, 1, c, c), nc::slice(ht, 1, c, c)));
      Var cand = nc::tanh(nc::add(nc::slice(xt, 1, 2 * c, c), nc::mul(r, nc::slice(ht, 1, 2 * c, c))));
      Var next = nc::add(state, nc::mul(z, nc::sub(cand, state)));
      std::vector<double> keep(n);
      for (std::size_t i = 0; i < n; ++i) {
        keep[i] = mask[i * t_len + t] ? 1.0 : 0.0;
      }
      state = nc::add(state, nc::scale_rows(nc::sub(next, state), keep));
      steps.push_back(nc::reshape(state, {n, 1, c}));
    }
    h = nc::concat(steps, 1);
  }
  return nc::add(x, nc::dropout(output(g, nc::gelu(h)), dropout));
}

AgentEncoder AgentEncoder::create(nc::ParameterStore & store, const std::string & name, const ModelConfig & c, nc::Rng & rng)
{
  AgentEncoder e;
  e.input = nc::Mlp::create(store, name + ".input", {agent_channels(c.coords), c.hidden, c.hidden}, rng);
  for (std::size_t i = 0; i < c.agent_blocks; ++i) {
    e.blocks.push_back(
      ScanBlock::create(store, name + ".block" + std::to_string(i), c.hidden, c.cell, c.dropout, rng));
  }
  e.norm = nc::LayerNorm::create(store, name + ".norm", c.hidden);
  return e;
}

Var AgentEncoder::operator()(nc::Graph & g, const Tensor & agents, const nc::Mask & mask) const
{
  const std::size_t n = agents.dim(0);
  const std::size_t t_len = agents.dim(1);
  Var x = input(g, g.constant(agents));
  for (const auto & b : blocks) {
    x = b(g, x, mask);
  }
  std::vector<std::size_t> rows(n);
  std::vector<double> any(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    rows[i] = i * t_len;
    for (std::size_t t = 0; t < t_len; ++t) {
      if (mask[i * t_len + t]) {
        rows[i] = i * t_len + t;
        any[i] = 1.0;
      }
    }
  }
  const std::size_t c = x.shape()[2];
  Var last = nc::gather(nc::reshape(x, {n * t_len, c}), rows);
  return nc::scale_rows(norm(g, last), any);
}

SceneEncoder SceneEncoder::create(nc::ParameterStore & store, const std::string & name, const ModelConfig & c, nc::Rng & rng)
{
  SceneEncoder e;
  e.motion_change = c.motion_change;
  e.lanes = PointEncoder::create(store, name + ".lanes", lane_channels(c.coords), c.hidden, rng);
  if (c.motion_change) {
    e.deltas = PointEncoder::create(store, name + ".deltas", lane_channels(c.coords), c.hidden, rng);
    e.fuse = nc::Mlp::create(store, name + ".fuse", {2 * c.hidden, c.hidden}, rng);
  }
  e.agents = AgentEncoder::create(store, name + ".agents", c, rng);
  RetOptions opt{c.hidden, c.heads, c.coords, c.relative_attention, c.relative_self_attention, c.dropout};
  for (std::size_t i = 0; i < c.encoder_layers; ++i) {
    e.layers.push_back(RetLayer::create(store, name + ".ret" + std::to_string(i), opt, rng));
  }
  return e;
}

Var SceneEncoder::encode_map(nc::Graph & g, const SceneInputs & in) const
{
  Var fm = lanes(g, in.lanes, in.lane_mask);
  if (!motion_change) {
    return fm;
  }
  Var fdm = deltas(g, in.lane_deltas, in.delta_mask);
  return fuse(g, nc::concat({fm, fdm}, 1));
}

SceneContext SceneEncoder::operator()(nc::Graph & g, const SceneInputs & in) const
{
  SceneContext ctx;
  ctx.num_lanes = in.num_lanes;
  ctx.num_agents = in.num_agents;
  ctx.keypoints = in.keypoints;
  ctx.mask = in.element_mask;
  Var fa = agents(g, in.agents, in.agent_mask);
  Var fs = in.num_lanes > 0 ? nc::concat({encode_map(g, in), fa}, 0) : fa;
  for (const auto & layer : layers) {
    const KeyedFeatures k{fs, ctx.keypoints, ctx.mask, {}};
    fs = layer(g, k, k);
  }
  ctx.features = fs;
  return ctx;
}

}  // namespace polarcast::model
