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

#include "polarcast/objective/loss.hpp"

#include <cmath>
#include <limits>

#include "polarcast/error.hpp"
#include "polarcast/numcore/ops.hpp"

namespace polarcast::objective
{

std::string to_string(Coordinate c) { return c == Coordinate::kPolar ? "polar" : "cartesian"; }

std::string to_string(LossBranches b)
{
  switch (b) {
    case LossBranches::kPolar:
      return "polar";
    case LossBranches::kCartesian:
      return "cartesian";
    case LossBranches::kBoth:
      return "both";
  }
  return "unknown";
}

LossBranches parse_loss_branches(const std::string & s)
{
  for (auto b : {LossBranches::kPolar, LossBranches::kCartesian, LossBranches::kBoth}) {
    if (to_string(b) == s) {
      return b;
    }
  }
  throw ConfigError("unknown loss branches '" + s + "' (expected polar, cartesian, both)");
}

bool LossConfig::uses(Coordinate c) const
{
  return branches == LossBranches::kBoth || (c == Coordinate::kPolar) == (branches == LossBranches::kPolar);
}

double LossReport::term_sum() const
{
  double s = 0.0;
  for (const auto & t : terms) {
    s += t.value;
  }
  return s;
}

double LossReport::stage_total(const std::string & stage) const
{
  double s = 0.0;
  for (const auto & t : terms) {
    if (t.stage == stage) {
      s += t.value;
    }
  }
  return s;
}

nlohmann::json LossReport::to_json() const
{
  nlohmann::json j;
  j["total"] = total;
  nlohmann::json terms_j = nlohmann::json::object();
  for (const auto & t : terms) {
    terms_j[t.stage + "/" + t.coordinate + "/" + t.kind] = t.value;
  }
  j["terms"] = terms_j;
  nlohmann::json w = nlohmann::json::object();
  for (std::size_t s = 0; s < stages.size(); ++s) {
    w[stages[s]] = winners[s];
  }
  j["winners"] = w;
  return j;
}

namespace
{

void check_gt(std::size_t agents, std::size_t steps, const std::vector<PolarPoint> & gt)
{
  if (gt.size() != agents * steps) {
    throw ShapeError(
      "loss: ground truth has " + std::to_string(gt.size()) + " points, expected " + std::to_string(agents) + " x " +
      std::to_string(steps));
  }
}

void check_winners(std::size_t modes, std::size_t agents, const std::vector<std::size_t> & winners)
{
  if (winners.size() != agents) {
    throw ShapeError("loss: " + std::to_string(winners.size()) + " winners for " + std::to_string(agents) + " agents");
  }
  for (auto w : winners) {
    if (w >= modes) {
      throw ShapeError("loss: winner " + std::to_string(w) + " out of range for " + std::to_string(modes) + " modes");
    }
  }
}

template <typename PointFn>
std::vector<std::size_t> argmin_displacement(
  std::size_t modes, std::size_t agents, std::size_t steps, const std::vector<PolarPoint> & gt, PointFn point)
{
  check_gt(agents, steps, gt);
  std::vector<std::size_t> winners(agents, 0);
  for (std::size_t n = 0; n < agents; ++n) {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < modes; ++k) {
      double total = 0.0;
      for (std::size_t t = 0; t < steps; ++t) {
        const geometry::Vec2 p = point(k, n, t);
        const geometry::Vec2 q = geometry::polar_to_cart(gt[n * steps + t]);
        total += std::hypot(p.x - q.x, p.y - q.y);
      }
      const double mean = total / static_cast<double>(steps);
      if (mean < best) {
        best = mean;
        winners[n] = k;
      }
    }
  }
  return winners;
}

nc::Tensor gt_tensor(const std::vector<PolarPoint> & gt, std::size_t agents, std::size_t steps, int which)
{
  nc::Tensor out({agents, steps});
  for (std::size_t i = 0; i < gt.size(); ++i) {
    const PolarPoint & p = gt[i];
    switch (which) {
      case 0:
        out[i] = p.r;
        break;
      case 1:
        out[i] = p.theta;
        break;
      case 2:
        out[i] = geometry::polar_to_cart(p).x;
        break;
      default:
        out[i] = geometry::polar_to_cart(p).y;
        break;
    }
  }
  return out;
}

StageOutput constant_stage(nc::Graph & g, const TrajectoryBundle & b)
{
  const std::size_t rows = b.modes * b.agents;
  nc::Tensor r({rows, b.steps});
  nc::Tensor theta({rows, b.steps});
  for (std::size_t i = 0; i < b.traj.size(); ++i) {
    r[i] = b.traj[i].r;
    theta[i] = b.traj[i].theta;
  }
  return model::polar_stage(
    b.stage, g.constant(std::move(r)), g.constant(std::move(theta)), g.constant(nc::Tensor({b.agents, b.modes})),
    b.modes, b.agents);
}

}  // namespace

std::vector<std::size_t> winner_take_all(const TrajectoryBundle & b, const std::vector<PolarPoint> & gt)
{
  return argmin_displacement(b.modes, b.agents, b.steps, gt, [&](std::size_t k, std::size_t n, std::size_t t) {
    return geometry::polar_to_cart(b.at(k, n, t));
  });
}

std::vector<std::size_t> winner_take_all(const StageOutput & s, const std::vector<PolarPoint> & gt)
{
  const nc::Tensor & x = s.x.value();
  const nc::Tensor & y = s.y.value();
  return argmin_displacement(s.modes, s.agents, s.steps, gt, [&](std::size_t k, std::size_t n, std::size_t t) {
    const std::size_t i = (k * s.agents + n) * s.steps + t;
    return geometry::Vec2{x[i], y[i]};
  });
}

nc::Var regression_loss(
  const StageOutput & s, const std::vector<PolarPoint> & gt, const std::vector<std::size_t> & winners,
  Coordinate c)
{
  check_gt(s.agents, s.steps, gt);
  check_winners(s.modes, s.agents, winners);
  nc::Graph & g = *s.r.graph;
  std::vector<std::size_t> rows(s.agents);
  for (std::size_t n = 0; n < s.agents; ++n) {
    rows[n] = winners[n] * s.agents + n;
  }
  nc::Var d0;
  nc::Var d1;
  if (c == Coordinate::kCartesian) {
    d0 = nc::sub(nc::gather(s.x, rows), g.constant(gt_tensor(gt, s.agents, s.steps, 2)));
    d1 = nc::sub(nc::gather(s.y, rows), g.constant(gt_tensor(gt, s.agents, s.steps, 3)));
  } else {
    d0 = nc::sub(nc::gather(s.r, rows), g.constant(gt_tensor(gt, s.agents, s.steps, 0)));
    d1 = nc::wrap_angle(nc::sub(nc::gather(s.theta, rows), g.constant(gt_tensor(gt, s.agents, s.steps, 1))));
  }
  const double count = 2.0 * static_cast<double>(s.agents * s.steps);
  return nc::scale(nc::add(nc::sum(nc::smooth_l1(d0)), nc::sum(nc::smooth_l1(d1))), 1.0 / count);
}

double regression_loss(
  const TrajectoryBundle & b, const std::vector<PolarPoint> & gt, const std::vector<std::size_t> & winners,
  Coordinate c)
{
  nc::Graph g;
  return regression_loss(constant_stage(g, b), gt, winners, c).value()[0];
}

nc::Var classification_loss(const StageOutput & s, const std::vector<std::size_t> & winners)
{
  check_winners(s.modes, s.agents, winners);
  std::vector<std::size_t> idx(s.agents);
  for (std::size_t n = 0; n < s.agents; ++n) {
    idx[n] = n * s.modes + winners[n];
  }
  nc::Var flat = nc::reshape(nc::log_softmax(s.logits), {s.agents * s.modes, 1});
  return nc::neg(nc::mean(nc::gather(flat, idx)));
}

double classification_loss(const TrajectoryBundle & b, const std::vector<std::size_t> & winners)
{
  check_winners(b.modes, b.agents, winners);
  double total = 0.0;
  for (std::size_t n = 0; n < b.agents; ++n) {
    total -= std::log(b.prob(winners[n], n));
  }
  return total / static_cast<double>(b.agents);
}

namespace
{

std::vector<std::size_t> selected_stages(std::size_t count, const LossConfig & cfg)
{
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < count; ++i) {
    if (i == 0 || cfg.all_refine_stages || i + 1 == count) {
      out.push_back(i);
    }
  }
  return out;
}

constexpr Coordinate kCoordinates[] = {Coordinate::kPolar, Coordinate::kCartesian};

}  // namespace

Loss total_loss(
  const std::vector<StageOutput> & stages, const std::vector<PolarPoint> & gt, const LossConfig & cfg,
  const std::vector<std::vector<std::size_t>> * fixed_winners)
{
  if (stages.empty()) {
    throw ShapeError("total_loss: no stages");
  }
  Loss out;
  std::vector<nc::Var> parts;
  const auto chosen = selected_stages(stages.size(), cfg);
  if (fixed_winners && fixed_winners->size() != chosen.size()) {
    throw ShapeError("total_loss: fixed winners for " + std::to_string(fixed_winners->size()) + " stages, expected " +
                     std::to_string(chosen.size()));
  }
  for (std::size_t ci = 0; ci < chosen.size(); ++ci) {
    const StageOutput & s = stages[chosen[ci]];
    auto winners = fixed_winners ? (*fixed_winners)[ci] : winner_take_all(s, gt);
    for (auto c : kCoordinates) {
      if (!cfg.uses(c)) {
        continue;
      }
      nc::Var reg = regression_loss(s, gt, winners, c);
      nc::Var cls = classification_loss(s, winners);
      out.report.terms.push_back({s.stage, to_string(c), "reg", reg.value()[0]});
      out.report.terms.push_back({s.stage, to_string(c), "cls", cls.value()[0]});
      parts.push_back(reg);
      parts.push_back(cls);
    }
    out.report.stages.push_back(s.stage);
    out.report.winners.push_back(std::move(winners));
  }
  out.total = parts.front();
  for (std::size_t i = 1; i < parts.size(); ++i) {
    out.total = nc::add(out.total, parts[i]);
  }
  out.report.total = out.total.value()[0];
  return out;
}

LossReport total_loss(
  const std::vector<TrajectoryBundle> & stages, const std::vector<PolarPoint> & gt, const LossConfig & cfg)
{
  if (stages.empty()) {
    throw ShapeError("total_loss: no stages");
  }
  LossReport report;
  for (auto i : selected_stages(stages.size(), cfg)) {
    const TrajectoryBundle & b = stages[i];
    auto winners = winner_take_all(b, gt);
    for (auto c : kCoordinates) {
      if (!cfg.uses(c)) {
        continue;
      }
      const double reg = regression_loss(b, gt, winners, c);
      const double cls = classification_loss(b, winners);
      report.terms.push_back({b.stage, to_string(c), "reg", reg});
      report.terms.push_back({b.stage, to_string(c), "cls", cls});
      report.total += reg + cls;
    }
    report.stages.push_back(b.stage);
    report.winners.push_back(std::move(winners));
  }
  return report;
}

}  // namespace polarcast::objective
