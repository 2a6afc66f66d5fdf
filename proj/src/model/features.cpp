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

#include "polarcast/model/features.hpp"

#include "polarcast/error.hpp"

namespace polarcast::model
{

using geometry::from_feature;
using geometry::polar_to_cart;

std::size_t lane_channels(CoordinateMode m) { return m == CoordinateMode::kPolar ? 3 : 2; }
std::size_t agent_channels(CoordinateMode m) { return m == CoordinateMode::kPolar ? 10 : 7; }
std::size_t relation_channels(CoordinateMode m) { return m == CoordinateMode::kCartesianMod ? 2 : 3; }
std::size_t waypoint_channels(CoordinateMode m) { return m == CoordinateMode::kPolar ? 3 : 2; }

namespace
{

void put_point(double * out, const geometry::PolarFeature & f, CoordinateMode m)
{
  if (m == CoordinateMode::kPolar) {
    out[0] = f.r / kLengthScale;
    out[1] = f.cos_theta;
    out[2] = f.sin_theta;
  } else {
    out[0] = f.r * f.cos_theta / kLengthScale;
    out[1] = f.r * f.sin_theta / kLengthScale;
  }
}

void put_delta(double * out, const geometry::RelativePolar & d, const geometry::PolarFeature & a,
               const geometry::PolarFeature & b, CoordinateMode m)
{
  if (m == CoordinateMode::kPolar) {
    out[0] = d.delta_r / kLengthScale;
    out[1] = d.cos_dtheta;
    out[2] = d.sin_dtheta;
  } else {
    out[0] = (b.r * b.cos_theta - a.r * a.cos_theta) / kLengthScale;
    out[1] = (b.r * b.sin_theta - a.r * a.sin_theta) / kLengthScale;
  }
}

}  // namespace

PolarPoint lane_centerpoint(const scene::Scene & s, std::size_t lane)
{
  std::vector<std::size_t> valid;
  for (std::size_t j = 0; j < s.lane_len; ++j) {
    if (s.lane_valid(lane, j)) {
      valid.push_back(j);
    }
  }
  if (valid.empty()) {
    return {};
  }
  return from_feature(s.lane_point(lane, valid[valid.size() / 2]));
}

SceneInputs featurize(const scene::Scene & s, const ModelConfig & config)
{
  if (s.hist_len != config.hist_len) {
    throw ConfigError(
      "scene " + s.id + ": hist_len " + std::to_string(s.hist_len) + " differs from model hist_len " +
      std::to_string(config.hist_len));
  }
  if (s.fut_len != config.fut_len) {
    throw ConfigError(
      "scene " + s.id + ": fut_len " + std::to_string(s.fut_len) + " differs from model fut_len " +
      std::to_string(config.fut_len));
  }
  if (s.num_lanes() > 0 && s.lane_len != config.lane_len) {
    throw ConfigError(
      "scene " + s.id + ": lane_len " + std::to_string(s.lane_len) + " differs from model lane_len " +
      std::to_string(config.lane_len));
  }
  const CoordinateMode m = config.coords;
  SceneInputs in;
  in.num_lanes = s.num_lanes();
  in.lane_len = config.lane_len;
  in.num_agents = s.num_agents();
  in.hist_len = s.hist_len;
  in.aoi = s.aoi;

  const std::size_t cm = lane_channels(m);
  in.lanes = nc::Tensor({in.num_lanes, in.lane_len, cm});
  in.lane_mask.assign(in.num_lanes * in.lane_len, 0);
  for (std::size_t i = 0; i < in.num_lanes; ++i) {
    for (std::size_t j = 0; j < in.lane_len; ++j) {
      const std::size_t idx = i * in.lane_len + j;
      in.lane_mask[idx] = s.lane_valid(i, j) ? 1 : 0;
      if (in.lane_mask[idx]) {
        put_point(in.lanes.data() + idx * cm, s.lane_point(i, j), m);
      }
    }
  }

  const std::size_t nd = in.lane_len - 1;
  in.lane_deltas = nc::Tensor({in.num_lanes, nd, cm});
  in.delta_mask.assign(in.num_lanes * nd, 0);
  if (in.num_lanes > 0) {
    const auto dm = scene::lane_change(s);
    for (std::size_t i = 0; i < in.num_lanes; ++i) {
      for (std::size_t j = 0; j < nd; ++j) {
        const std::size_t idx = i * nd + j;
        in.delta_mask[idx] = dm.mask[idx];
        if (dm.mask[idx]) {
          put_delta(in.lane_deltas.data() + idx * cm, dm.at(i, j), s.lane_point(i, j), s.lane_point(i, j + 1), m);
        }
      }
    }
  }

  const std::size_t ca = agent_channels(m);
  in.agents = nc::Tensor({in.num_agents, in.hist_len, ca});
  in.agent_mask.assign(in.num_agents * in.hist_len, 0);
  in.last_valid.assign(in.num_agents, 0);
  std::vector<std::uint8_t> agent_any(in.num_agents, 0);
  for (std::size_t a = 0; a < in.num_agents; ++a) {
    for (std::size_t t = 0; t < in.hist_len; ++t) {
      const auto & st = s.agent(a, t);
      const std::size_t idx = a * in.hist_len + t;
      if (!st.valid) {
        continue;
      }
      in.agent_mask[idx] = 1;
      in.last_valid[a] = t;
      agent_any[a] = 1;
      double * out = in.agents.data() + idx * ca;
      if (m == CoordinateMode::kPolar) {
        put_point(out, st.position, m);
        put_point(out + 3, st.velocity, m);
        put_point(out + 6, st.acceleration, m);
        out[9] = 1.0;
      } else {
        put_point(out, st.position, m);
        put_point(out + 2, st.velocity, m);
        put_point(out + 4, st.acceleration, m);
        out[6] = 1.0;
      }
      if (!config.motion_change) {
        const std::size_t w = lane_channels(m);
        std::fill(out + w, out + 3 * w, 0.0);
      }
    }
  }

  in.keypoints.resize(in.num_elements());
  in.element_mask.assign(in.num_elements(), 0);
  for (std::size_t i = 0; i < in.num_lanes; ++i) {
    in.keypoints[i] = lane_centerpoint(s, i);
    for (std::size_t j = 0; j < in.lane_len; ++j) {
      in.element_mask[i] |= in.lane_mask[i * in.lane_len + j];
    }
  }
  for (std::size_t a = 0; a < in.num_agents; ++a) {
    in.element_mask[in.num_lanes + a] = agent_any[a];
    if (agent_any[a]) {
      in.keypoints[in.num_lanes + a] = from_feature(s.agent(a, in.last_valid[a]).position);
    }
  }
  return in;
}

nc::Tensor relative_features(
  const std::vector<PolarPoint> & queries, const std::vector<PolarPoint> & keys, CoordinateMode mode)
{
  const std::size_t c = relation_channels(mode);
  nc::Tensor out({queries.size(), keys.size(), c});
  double * o = out.data();
  for (const auto & q : queries) {
    const auto qc = polar_to_cart(q);
    for (const auto & k : keys) {
      if (mode == CoordinateMode::kCartesianMod) {
        const auto kc = polar_to_cart(k);
        o[0] = (kc.x - qc.x) / kLengthScale;
        o[1] = (kc.y - qc.y) / kLengthScale;
      } else {
        const auto rel = geometry::relative_polar(q, k);
        o[0] = rel.delta_r / kLengthScale;
        o[1] = rel.cos_dtheta;
        o[2] = rel.sin_dtheta;
      }
      o += c;
    }
  }
  return out;
}

KeypointVars constant_keypoints(nc::Graph & g, const std::vector<PolarPoint> & points)
{
  nc::Tensor r({points.size(), 1});
  nc::Tensor theta({points.size(), 1});
  for (std::size_t i = 0; i < points.size(); ++i) {
    r[i] = points[i].r;
    theta[i] = points[i].theta;
  }
  return {g.constant(std::move(r)), g.constant(std::move(theta))};
}

nc::Var relative_features(const KeypointVars & queries, const KeypointVars & keys, CoordinateMode mode)
{
  const std::size_t nu = queries.r.shape()[0];
  const std::size_t nv = keys.r.shape()[0];
  std::vector<std::size_t> qi(nu * nv);
  std::vector<std::size_t> ki(nu * nv);
  for (std::size_t u = 0; u < nu; ++u) {
    for (std::size_t v = 0; v < nv; ++v) {
      qi[u * nv + v] = u;
      ki[u * nv + v] = v;
    }
  }
  nc::Var rq = nc::gather(queries.r, qi);
  nc::Var tq = nc::gather(queries.theta, qi);
  nc::Var rk = nc::gather(keys.r, ki);
  nc::Var tk = nc::gather(keys.theta, ki);
  std::vector<nc::Var> parts;
  if (mode == CoordinateMode::kCartesianMod) {
    nc::Var dx = nc::sub(nc::mul(rk, nc::cos(tk)), nc::mul(rq, nc::cos(tq)));
    nc::Var dy = nc::sub(nc::mul(rk, nc::sin(tk)), nc::mul(rq, nc::sin(tq)));
    parts = {nc::scale(dx, 1.0 / kLengthScale), nc::scale(dy, 1.0 / kLengthScale)};
  } else {
    nc::Var dtheta = nc::sub(tk, tq);
    parts = {nc::scale(nc::sub(rk, rq), 1.0 / kLengthScale), nc::cos(dtheta), nc::sin(dtheta)};
  }
  return nc::reshape(nc::concat(parts, 1), {nu, nv, relation_channels(mode)});
}

nc::Mask pair_mask(const nc::Mask & queries, const nc::Mask & keys)
{
  nc::Mask m(queries.size() * keys.size(), 0);
  for (std::size_t u = 0; u < queries.size(); ++u) {
    for (std::size_t v = 0; v < keys.size(); ++v) {
      m[u * keys.size() + v] = queries[u] && keys[v] ? 1 : 0;
    }
  }
  return m;
}

}  // namespace polarcast::model
