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

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <memory>
#include <numbers>
#include <numeric>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "polarcast/app/trainer.hpp"
#include "polarcast/error.hpp"
#include "polarcast/evalkit/baseline.hpp"
#include "polarcast/evalkit/ensemble.hpp"
#include "polarcast/evalkit/metrics.hpp"
#include "polarcast/geometry/polar.hpp"
#include "polarcast/model/encoder.hpp"
#include "polarcast/model/ret.hpp"
#include "polarcast/numcore/checkpoint.hpp"
#include "polarcast/numcore/gradcheck.hpp"
#include "polarcast/objective/fd_check.hpp"
#include "polarcast/objective/loss.hpp"
#include "polarcast/scene/generator.hpp"
#include "polarcast/scene/io.hpp"
#include "support/metric_oracle.hpp"

using namespace polarcast;
using geometry::PolarPoint;
using geometry::Vec2;
using nc::Graph;
using nc::Tensor;

namespace
{

constexpr double kPi = std::numbers::pi;

struct Outcome
{
  bool pass = false;
  std::string detail;
};

std::string fmt(const char * f, double v)
{
  char buf[64];
  std::snprintf(buf, sizeof(buf), f, v);
  return buf;
}

std::string sci(double v) { return fmt("%.2e", v); }
std::string fix(double v) { return fmt("%.4f", v); }

double seconds_since(std::chrono::steady_clock::time_point t0)
{
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

Tensor random_tensor(nc::Shape shape, std::mt19937_64 & rng)
{
  Tensor t(std::move(shape));
  std::uniform_real_distribution<double> d(-1.0, 1.0);
  for (auto & v : t.values()) {
    v = d(rng);
  }
  return t;
}

std::vector<PolarPoint> random_points(std::size_t n, std::mt19937_64 & rng)
{
  std::uniform_real_distribution<double> r(0.5, 30.0);
  std::uniform_real_distribution<double> th(-3.0, 3.0);
  std::vector<PolarPoint> out(n);
  for (auto & p : out) {
    p = {r(rng), th(rng)};
  }
  return out;
}

Tensor permute_rows(const Tensor & t, const std::vector<std::size_t> & perm)
{
  const std::size_t row = t.size() / t.dim(0);
  Tensor out(t.shape());
  for (std::size_t i = 0; i < perm.size(); ++i) {
    std::copy_n(t.data() + perm[i] * row, row, out.data() + i * row);
  }
  return out;
}

template <typename T>
std::vector<T> permuted(const std::vector<T> & v, const std::vector<std::size_t> & perm)
{
  std::vector<T> out(v.size());
  for (std::size_t i = 0; i < perm.size(); ++i) {
    out[i] = v[perm[i]];
  }
  return out;
}

model::KeyedFeatures keyed(Graph & g, const Tensor & f, std::vector<PolarPoint> pts, nc::Mask mask = {})
{
  if (mask.empty()) {
    mask.assign(pts.size(), 1);
  }
  return {g.constant(f), std::move(pts), std::move(mask), {}};
}

// ---------------------------------------------------------------------------
// Training budgets and the shared cache of trained models.

struct Budget
{
  std::size_t train_scenes = 0;
  std::size_t val_scenes = 0;
  std::size_t epochs = 0;
  std::size_t hidden = 64;
};

// Convergence run: the reference desk configuration.
constexpr Budget kConvergence = {2000, 500, 30, 64};
// Directional ablations; one budget for every compared cell.
constexpr Budget kAblation = {2000, 500, 20, 32};
// Ensemble mechanics only need trained, distinct members.
constexpr Budget kEnsemble = {800, 200, 6, 32};

struct Cell
{
  app::RunConfig config;
  std::unique_ptr<model::TrajectoryModel> model;
  app::Evaluation validation;
  double seconds = 0.0;
};

class Lab
{
public:
  const std::vector<scene::Scene> & scenes(const std::string & split, bool val, const Budget & b)
  {
    const std::string key = split + (val ? "/val/" : "/train/") + std::to_string(val ? b.val_scenes : b.train_scenes);
    auto it = data_.find(key);
    if (it == data_.end()) {
      scene::GeneratorConfig g;
      if (split == "turning") {
        g.mix = scene::kTurningHeavyMix;
      }
      const std::uint64_t seed = (split == "turning" ? 500 : 100) + (val ? 1 : 0);
      it = data_
             .emplace(
               key, scene::generate_dataset(
                      scene::ScenarioKind::kMixed, val ? b.val_scenes : b.train_scenes, seed, g, split + "-"))
             .first;
    }
    return it->second;
  }

  app::RunConfig base(const Budget & b) const
  {
    app::RunConfig c;
    c.model.hidden = b.hidden;
    c.train.epochs = b.epochs;
    return c;
  }

  Cell & cell(const std::string & split, const app::RunConfig & cfg, const Budget & b)
  {
    const std::string key = split + to_json(cfg).dump() + std::to_string(b.train_scenes);
    auto it = cells_.find(key);
    if (it != cells_.end()) {
      return it->second;
    }
    const auto t0 = std::chrono::steady_clock::now();
    Cell c;
    c.config = cfg;
    c.model = std::make_unique<model::TrajectoryModel>(cfg.model);
    const auto r = app::train(*c.model, cfg, scenes(split, false, b), scenes(split, true, b));
    if (r.aborted) {
      throw NumericError("training aborted: " + r.diagnostic);
    }
    c.validation = r.history.back().validation;
    c.seconds = seconds_since(t0);
    std::printf(
      "    trained %s coords=%s depth=%zu loss=%s seed=%llu: minADE_6 %.4f minFDE_6 %.4f (%.0f s)\n",
      split.c_str(), model::to_string(cfg.model.coords).c_str(), cfg.model.refine_depth,
      objective::to_string(cfg.loss.branches).c_str(), static_cast<unsigned long long>(cfg.model.seed),
      c.validation.mean.at(6).min_ade, c.validation.mean.at(6).min_fde, c.seconds);
    std::fflush(stdout);
    return cells_.emplace(key, std::move(c)).first->second;
  }

private:
  std::map<std::string, std::vector<scene::Scene>> data_;
  std::map<std::string, Cell> cells_;
};

// ---------------------------------------------------------------------------

Outcome gradient_fidelity(Lab &)
{
  const auto t0 = std::chrono::steady_clock::now();
  double worst = 0.0;
  double worst_small = 0.0;
  std::size_t checked = 0;
  std::string where;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto r = objective::finite_difference_check(objective::tiny_config(), seed);
    checked += r.checked;
    if (r.max_rel_err >= worst) {
      worst = r.max_rel_err;
      where = r.worst + " (seed " + std::to_string(seed) + ")";
    }
    if (r.floor > 0.0) {
      worst_small = std::max(worst_small, r.max_abs_err_below_floor / r.floor);
    }
  }
  double prim = 0.0;
  double prim_small = 0.0;
  std::string prim_where;
  std::size_t prims = 0;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    for (const auto & c : nc::check_primitives(seed)) {
      ++prims;
      prim_small = std::max(prim_small, c.max_abs_err_below_floor / c.floor);
      if (c.max_rel_err >= prim) {
        prim = c.max_rel_err;
        prim_where = c.name;
      }
    }
  }
  const double secs = seconds_since(t0);
  return {
    worst < 1e-4 && worst_small <= 1e-4 && prim < 1e-6 && prim_small <= 1e-6 && secs < 300.0,
    "pipeline max rel-err " + sci(worst) + " at " + where + " over " + std::to_string(checked) +
      " entries / 20 seeds (< 1e-4); below-floor abs err <= " + sci(worst_small) + " x floor; primitives max " +
      sci(prim) + " at " + prim_where + " over " + std::to_string(prims) + " checks / 20 seeds (< 1e-6), below-floor " +
      sci(prim_small) + " x floor; " + fix(secs) +
      " s (< 300 s)"};
}

Outcome geometry_round_trips(Lab &)
{
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> logr(std::log(1e-6), std::log(1e3));
  std::uniform_real_distribution<double> ang(-kPi, kPi);
  std::uniform_real_distribution<double> wide(-200.0, 200.0);
  std::uniform_real_distribution<double> rot(-20.0, 20.0);
  double cart = 0.0;
  double polar = 0.0;
  double wrap = 0.0;
  bool idempotent = true;
  double rel = 0.0;
  for (int i = 0; i < 100000; ++i) {
    const double r = std::exp(logr(rng));
    const double a = ang(rng);
    const Vec2 p{r * std::cos(a), r * std::sin(a)};
    const Vec2 q = geometry::polar_to_cart(geometry::cart_to_polar(p));
    cart = std::max({cart, std::abs(q.x - p.x), std::abs(q.y - p.y)});
    const PolarPoint pp{r, a};
    const PolarPoint qq = geometry::cart_to_polar(geometry::polar_to_cart(pp));
    polar = std::max({polar, std::abs(qq.r - pp.r) / std::max(1.0, pp.r), std::abs(geometry::wrap_angle(qq.theta - pp.theta))});

    const double x = wide(rng);
    const double w = geometry::wrap_angle(x);
    idempotent = idempotent && geometry::wrap_angle(w) == w && w > -kPi && w <= kPi;
    const double k = std::round((x - w) / (2.0 * kPi));
    wrap = std::max(wrap, std::abs(x - w - 2.0 * kPi * k));

    const PolarPoint s{std::exp(logr(rng)), ang(rng)};
    const auto base = geometry::relative_polar(pp, s);
    const double phi = rot(rng);
    const auto turned = geometry::relative_polar(
      {pp.r, geometry::wrap_angle(pp.theta + phi)}, {s.r, geometry::wrap_angle(s.theta + phi)});
    rel = std::max(
      {rel, std::abs(turned.delta_r - base.delta_r), std::abs(turned.cos_dtheta - base.cos_dtheta),
       std::abs(turned.sin_dtheta - base.sin_dtheta)});
  }
  return {
    cart < 1e-9 && polar < 1e-9 && idempotent && wrap < 1e-12 && rel <= 1e-12,
    "cart->polar->cart " + sci(cart) + ", polar->cart->polar " + sci(polar) + " (< 1e-9, 1e5 points, r in [1e-6, 1e3]); wrap idempotent " +
      (idempotent ? "yes" : "NO") + ", mod-2pi residual " + sci(wrap) + "; relative_polar rotation " + sci(rel) +
      " (<= 1e-12)"};
}

Outcome metric_oracle(Lab &)
{
  const auto t0 = std::chrono::steady_clock::now();
  std::mt19937_64 rng(3);
  double worst = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const auto c = testing_support::random_case(rng);
    std::vector<std::size_t> ks(c.bundle.modes);
    std::iota(ks.begin(), ks.end(), 1);
    const auto r = evalkit::compute_metrics(c.bundle, c.gt, ks);
    for (auto k : ks) {
      const auto o = testing_support::brute_force(c.bundle, c.gt, k);
      const auto & v = r.at(k);
      worst = std::max(
        {worst, std::abs(v.min_ade - o.min_ade), std::abs(v.min_fde - o.min_fde), std::abs(v.miss_rate - o.miss_rate),
         std::abs(v.brier_min_fde - o.brier_min_fde)});
    }
  }
  std::size_t violations = 0;
  for (int i = 0; i < 10000; ++i) {
    auto c = testing_support::random_case(rng, 6, 30);
    if (c.bundle.modes < 6) {
      continue;
    }
    const auto r = evalkit::compute_metrics(c.bundle, c.gt, {1, 6});
    const auto & a = r.at(1);
    const auto & b = r.at(6);
    for (const auto * v : {&a, &b}) {
      violations += (v->miss_rate < 0.0 || v->miss_rate > 1.0 || v->brier_min_fde < v->min_fde) ? 1 : 0;
    }
    violations += (a.min_ade < b.min_ade || a.min_fde < b.min_fde) ? 1 : 0;
  }
  std::size_t checked = 0;
  for (int i = 0; i < 10000; ++i) {
    auto c = testing_support::random_case(rng, 6, 30);
    std::vector<std::size_t> ks(c.bundle.modes);
    std::iota(ks.begin(), ks.end(), 1);
    const auto r = evalkit::compute_metrics(c.bundle, c.gt, ks);
    for (std::size_t j = 0; j < ks.size(); ++j) {
      const auto & v = r.values[j];
      violations += (v.miss_rate < 0.0 || v.miss_rate > 1.0 || v.brier_min_fde < v.min_fde) ? 1 : 0;
      if (j > 0) {
        violations += (r.values[0].min_ade < v.min_ade || r.values[0].min_fde < v.min_fde) ? 1 : 0;
      }
    }
    ++checked;
  }
  const double secs = seconds_since(t0);
  return {
    worst <= 1e-12 && violations == 0 && secs < 60.0,
    "oracle max diff " + sci(worst) + " on 1000 bundles (<= 1e-12); invariant violations " +
      std::to_string(violations) + " on " + std::to_string(checked) + " + 1e4 bundles; " + fix(secs) + " s (< 60 s)"};
}

Outcome ret_structure(Lab &)
{
  std::mt19937_64 rng(4);
  model::RetOptions opt;
  opt.hidden = 16;
  opt.heads = 2;
  nc::ParameterStore store;
  auto layer = model::RetLayer::create(store, "ret", opt, rng);
  double key_perm = 0.0;
  double query_perm = 0.0;
  for (int trial = 0; trial < 50; ++trial) {
    Graph g;
    const Tensor qf = random_tensor({5, 16}, rng);
    const auto qp = random_points(5, rng);
    const nc::Mask qm = {1, 0, 1, 1, 1};
    const Tensor kf = random_tensor({7, 16}, rng);
    const auto kp = random_points(7, rng);
    const nc::Mask km = {1, 1, 0, 1, 1, 0, 1};
    std::vector<std::size_t> kperm(7);
    std::iota(kperm.begin(), kperm.end(), 0);
    std::shuffle(kperm.begin(), kperm.end(), rng);
    std::vector<std::size_t> qperm(5);
    std::iota(qperm.begin(), qperm.end(), 0);
    std::shuffle(qperm.begin(), qperm.end(), rng);
    const Tensor a = layer(g, keyed(g, qf, qp, qm), keyed(g, kf, kp, km)).value();
    const Tensor b =
      layer(g, keyed(g, qf, qp, qm), keyed(g, permute_rows(kf, kperm), permuted(kp, kperm), permuted(km, kperm)))
        .value();
    key_perm = std::max(key_perm, nc::max_abs_diff(a, b));
    const Tensor c =
      layer(g, keyed(g, permute_rows(qf, qperm), permuted(qp, qperm), permuted(qm, qperm)), keyed(g, kf, kp, km))
        .value();
    query_perm = std::max(query_perm, nc::max_abs_diff(permute_rows(a, qperm), c));
  }

  Graph g;
  model::RetTrace trace;
  layer(g, keyed(g, random_tensor({4, 16}, rng), random_points(4, rng)), keyed(g, random_tensor({1, 16}, rng), random_points(1, rng)), &trace);
  bool singleton = trace.cross.size() == 2 * 4;
  for (double w : trace.cross.values()) {
    singleton = singleton && w == 1.0;
  }

  const auto same = random_points(1, rng);
  const Tensor e =
    layer
      .relative_embedding(
        g, keyed(g, Tensor({3, 16}), std::vector<PolarPoint>(3, same[0])),
        keyed(g, Tensor({5, 16}), std::vector<PolarPoint>(5, same[0])))
      .value();
  double spread = 0.0;
  for (std::size_t pair = 1; pair < 15; ++pair) {
    for (std::size_t c = 0; c < 16; ++c) {
      spread = std::max(spread, std::abs(e[pair * 16 + c] - e[c]));
    }
  }
  return {
    key_perm <= 1e-12 && query_perm <= 1e-12 && singleton && spread == 0.0,
    "key permutation " + sci(key_perm) + ", query permutation " + sci(query_perm) + " (<= 1e-12); singleton weight 1: " +
      (singleton ? "yes" : "NO") + "; identical-keypoint embedding spread " + sci(spread)};
}

Outcome encoder_symmetries(Lab &)
{
  std::mt19937_64 rng(5);
  nc::ParameterStore store;
  auto lanes = model::PointEncoder::create(store, "lanes", 3, 16, rng);
  double lane_err = 0.0;
  for (int trial = 0; trial < 50; ++trial) {
    Graph g;
    const Tensor pts = random_tensor({3, 6, 3}, rng);
    nc::Mask mask(18, 1);
    mask[rng() % 18] = 0;
    const Tensor base = lanes(g, pts, mask).value();
    std::vector<std::size_t> order(6);
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), rng);
    Tensor perm(pts.shape());
    nc::Mask perm_mask(18);
    Tensor dup({3, 12, 3});
    nc::Mask dup_mask(36);
    for (std::size_t l = 0; l < 3; ++l) {
      for (std::size_t j = 0; j < 6; ++j) {
        std::copy_n(pts.data() + (l * 6 + order[j]) * 3, 3, perm.data() + (l * 6 + j) * 3);
        perm_mask[l * 6 + j] = mask[l * 6 + order[j]];
      }
      for (std::size_t j = 0; j < 12; ++j) {
        std::copy_n(pts.data() + (l * 6 + j % 6) * 3, 3, dup.data() + (l * 12 + j) * 3);
        dup_mask[l * 12 + j] = mask[l * 6 + j % 6];
      }
    }
    lane_err = std::max(
      {lane_err, nc::max_abs_diff(lanes(g, perm, perm_mask).value(), base),
       nc::max_abs_diff(lanes(g, dup, dup_mask).value(), base)});
  }

  double trunc = 0.0;
  for (auto cell : {model::SequenceCell::kSsm, model::SequenceCell::kGru}) {
    model::ModelConfig c;
    c.hidden = 16;
    c.heads = 2;
    c.hist_len = 10;
    c.agent_blocks = 2;
    c.cell = cell;
    c.dropout = 0.0;
    nc::ParameterStore s;
    auto enc = model::AgentEncoder::create(s, "agents", c, rng);
    const std::size_t ch = model::agent_channels(c.coords);
    for (std::size_t lead = 0; lead < 10; ++lead) {
      const Tensor full = random_tensor({1, 10, ch}, rng);
      nc::Mask mask(10, 1);
      std::fill_n(mask.begin(), lead, 0);
      Tensor cut({1, 10 - lead, ch});
      std::copy_n(full.data() + lead * ch, (10 - lead) * ch, cut.data());
      Graph g;
      trunc = std::max(trunc, nc::max_abs_diff(enc(g, full, mask).value(), enc(g, cut, nc::Mask(10 - lead, 1)).value()));
    }
  }
  return {
    lane_err == 0.0 && trunc <= 1e-12,
    "lane point permutation/duplication max diff " + sci(lane_err) + " (exact); agent mask vs truncation " +
      sci(trunc) + " (<= 1e-12, SSM and GRU)"};
}

Outcome loss_correctness(Lab &)
{
  using objective::Coordinate;
  std::vector<std::string> failed;
  Graph g;
  const std::size_t n = 2;
  const std::size_t t = 4;
  std::vector<PolarPoint> gt(n * t);
  for (std::size_t i = 0; i < gt.size(); ++i) {
    gt[i] = {1.25 * static_cast<double>(i + 1), 0.0};
  }
  Tensor x({n, t});
  Tensor y({n, t}, -0.5);
  for (std::size_t i = 0; i < gt.size(); ++i) {
    x[i] = gt[i].r;
  }
  const auto at_gt = model::cartesian_stage("proposal", g.constant(x), g.constant(Tensor({n, t})), g.constant(Tensor({n, 1})), 1, n);
  if (objective::regression_loss(at_gt, gt, {0, 0}, Coordinate::kCartesian).value()[0] != 0.0) {
    failed.push_back("zero at GT (cartesian)");
  }
  Tensor r({n, t});
  Tensor th({n, t});
  for (std::size_t i = 0; i < gt.size(); ++i) {
    r[i] = gt[i].r;
  }
  const auto polar_gt = model::polar_stage("proposal", g.constant(r), g.constant(th), g.constant(Tensor({n, 1})), 1, n);
  if (objective::regression_loss(polar_gt, gt, {0, 0}, Coordinate::kPolar).value()[0] != 0.0) {
    failed.push_back("zero at GT (polar)");
  }
  for (auto & v : x.values()) {
    v += 0.5;
  }
  const auto off = model::cartesian_stage("proposal", g.constant(x), g.constant(y), g.constant(Tensor({n, 1})), 1, n);
  const double half = objective::regression_loss(off, gt, {0, 0}, Coordinate::kCartesian).value()[0];
  if (half != 0.125) {
    failed.push_back("smooth-L1 at d = 0.5 gave " + std::to_string(half));
  }

  Tensor ones({6, 2}, 1.0);
  const auto uniform = model::polar_stage("proposal", g.constant(ones), g.constant(Tensor({6, 2})), g.constant(Tensor({1, 6})), 6, 1);
  const double cls = objective::classification_loss(uniform, {3}).value()[0];
  if (cls != std::log(6.0)) {
    failed.push_back("uniform K = 6 classification " + std::to_string(cls));
  }

  const double dyadic[] = {0.5, -1.25, 2.75, -3.0};
  std::vector<PolarPoint> gt1(4);
  Tensor r1({1, 4});
  Tensor th1({1, 4});
  for (std::size_t s = 0; s < 4; ++s) {
    gt1[s] = {3.0 + static_cast<double>(s), dyadic[s]};
    r1[s] = gt1[s].r;
  }
  for (int turns : {-2, -1, 1, 3}) {
    for (std::size_t s = 0; s < 4; ++s) {
      th1[s] = dyadic[s] + 2.0 * kPi * turns;
    }
    const auto wrapped = model::polar_stage("proposal", g.constant(r1), g.constant(th1), g.constant(Tensor({1, 1})), 1, 1);
    if (objective::regression_loss(wrapped, gt1, {0}, Coordinate::kPolar).value()[0] != 0.0) {
      failed.push_back("2pi wrap with " + std::to_string(turns) + " turns");
    }
  }

  std::mt19937_64 rng(6);
  double sum_gap = 0.0;
  std::uniform_real_distribution<double> rd(0.1, 30.0);
  std::uniform_real_distribution<double> ad(-3.0, 3.0);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<PolarPoint> truth(3 * 5);
    for (auto & p : truth) {
      p = {rd(rng), ad(rng)};
    }
    std::vector<model::StageOutput> stages;
    for (const char * name : {"proposal", "refine0", "refine1"}) {
      Tensor sr({4 * 3, 5});
      Tensor st({4 * 3, 5});
      for (std::size_t i = 0; i < sr.size(); ++i) {
        sr[i] = rd(rng);
        st[i] = ad(rng);
      }
      stages.push_back(model::polar_stage(name, g.constant(sr), g.constant(st), g.constant(random_tensor({3, 4}, rng)), 4, 3));
    }
    for (auto branches : {objective::LossBranches::kPolar, objective::LossBranches::kCartesian, objective::LossBranches::kBoth}) {
      const auto loss = objective::total_loss(stages, truth, {branches, true});
      sum_gap = std::max(
        {sum_gap, std::abs(loss.report.total - loss.report.term_sum()), std::abs(loss.total.value()[0] - loss.report.total)});
    }
  }
  if (sum_gap > 1e-12) {
    failed.push_back("total differs from the breakdown by " + sci(sum_gap));
  }
  std::string detail = "0 at GT, 0.125 at d = 0.5, log 6 for uniform K = 6, 2pi wrap invariance; |total - sum(terms)| max " + sci(sum_gap);
  for (const auto & f : failed) {
    detail += "; FAILED " + f;
  }
  return {failed.empty(), detail};
}

Outcome training_convergence(Lab & lab)
{
  const auto t0 = std::chrono::steady_clock::now();
  const auto & val = lab.scenes("mixed", true, kConvergence);
  evalkit::MetricTable cv;
  for (const auto & s : val) {
    cv.add(s.id, evalkit::compute_metrics(evalkit::constant_velocity_bundle(s, 6), s.ground_truth));
  }
  const double baseline = cv.mean().at(6).min_ade;
  auto & cell = lab.cell("mixed", lab.base(kConvergence), kConvergence);
  const double got = cell.validation.mean.at(6).min_ade;
  const double secs = seconds_since(t0);
  return {
    got <= 0.7 * baseline && secs < 2700.0,
    "validation minADE_6 " + fix(got) + " vs constant-velocity " + fix(baseline) + " (ratio " + fix(got / baseline) +
      ", need <= 0.70); 2000 scenes, C = 64, K = 6, 30 epochs in " + fmt("%.0f", secs) + " s (< 2700 s)"};
}

Outcome coordinate_ablation(Lab & lab)
{
  std::map<std::string, double> fde;
  for (auto mode : {model::CoordinateMode::kPolar, model::CoordinateMode::kCartesianMod, model::CoordinateMode::kCartesianOri}) {
    auto cfg = lab.base(kAblation);
    cfg.model.coords = mode;
    fde[model::to_string(mode)] = lab.cell("turning", cfg, kAblation).validation.mean.at(6).min_fde;
  }
  const double p = fde["polar"];
  const double m = fde["cartesian-mod"];
  const double o = fde["cartesian-ori"];
  return {
    p <= m && p <= o, "turning-heavy minFDE_6: polar " + fix(p) + ", cartesian-mod " + fix(m) + ", cartesian-ori " + fix(o) +
                        " (need polar <= both)"};
}

Outcome refinement_depth(Lab & lab)
{
  std::vector<double> fde;
  double proposal = 0.0;
  double refined = 0.0;
  for (std::size_t depth : {0u, 1u, 2u}) {
    auto cfg = lab.base(kAblation);
    cfg.model.refine_depth = depth;
    const auto & cell = lab.cell("mixed", cfg, kAblation);
    fde.push_back(cell.validation.mean.at(6).min_fde);
    if (depth == 2) {
      proposal = cell.validation.stage_loss.front();
      refined = cell.validation.stage_loss.back();
    }
  }
  return {
    fde[0] >= fde[1] && fde[1] >= fde[2] && refined <= proposal,
    "minFDE_6 depth 0/1/2: " + fix(fde[0]) + " / " + fix(fde[1]) + " / " + fix(fde[2]) +
      " (need non-increasing); depth-2 validation loss final " + fix(refined) + " vs proposal " + fix(proposal)};
}

Outcome loss_ablation(Lab & lab)
{
  std::map<std::string, double> fde;
  for (auto b : {objective::LossBranches::kBoth, objective::LossBranches::kPolar, objective::LossBranches::kCartesian}) {
    auto cfg = lab.base(kAblation);
    cfg.loss.branches = b;
    fde[objective::to_string(b)] = lab.cell("mixed", cfg, kAblation).validation.mean.at(6).min_fde;
  }
  return {
    fde["both"] <= fde["polar"] && fde["both"] <= fde["cartesian"],
    "minFDE_6 both " + fix(fde["both"]) + ", polar " + fix(fde["polar"]) + ", cartesian " + fix(fde["cartesian"]) +
      " (need both <= each)"};
}

Outcome ensembling(Lab & lab)
{
  std::vector<const model::TrajectoryModel *> members;
  double single_mean = 0.0;
  for (std::uint64_t seed = 0; seed < 7; ++seed) {
    auto cfg = lab.base(kEnsemble);
    cfg.model.seed = seed;
    cfg.train.seed = seed;
    const auto & cell = lab.cell("mixed", cfg, kEnsemble);
    members.push_back(cell.model.get());
    single_mean += cell.validation.mean.at(6).min_fde / 7.0;
  }
  const auto & val = lab.scenes("mixed", true, kEnsemble);

  bool shape_ok = true;
  double prob_gap = 0.0;
  bool bytes_equal = true;
  double degenerate = 0.0;
  evalkit::MetricTable merged;
  evalkit::MetricTable single;
  evalkit::MetricTable copies;
  for (const auto & s : val) {
    std::vector<scene::TrajectoryBundle> preds;
    for (const auto * m : members) {
      preds.push_back(m->predict(s));
    }
    const auto a = evalkit::kmeans_ensemble(preds, {6, 7});
    const auto b = evalkit::kmeans_ensemble(preds, {6, 7});
    bytes_equal = bytes_equal && scene::bundle_to_json(a).dump() == scene::bundle_to_json(b).dump();
    shape_ok = shape_ok && a.modes == 6 && a.agents == preds[0].agents && a.steps == preds[0].steps;
    try {
      a.validate();
    } catch (const ValidationError &) {
      shape_ok = false;
    }
    for (std::size_t n = 0; n < a.agents; ++n) {
      double sum = 0.0;
      for (std::size_t m = 0; m < a.modes; ++m) {
        sum += a.prob(m, n);
      }
      prob_gap = std::max(prob_gap, std::abs(sum - 1.0));
    }
    merged.add(s.id, evalkit::compute_metrics(a, s.ground_truth));
    single.add(s.id, evalkit::compute_metrics(preds[0], s.ground_truth));
    const auto same = evalkit::kmeans_ensemble(std::vector<scene::TrajectoryBundle>(7, preds[0]), {6, 7});
    copies.add(s.id, evalkit::compute_metrics(same, s.ground_truth));
  }
  for (std::size_t i = 0; i < single.rows.size(); ++i) {
    for (std::size_t j = 0; j < single.rows[i].values.size(); ++j) {
      const auto & u = single.rows[i].values[j];
      const auto & v = copies.rows[i].values[j];
      degenerate = std::max(
        {degenerate, std::abs(u.min_ade - v.min_ade), std::abs(u.min_fde - v.min_fde), std::abs(u.miss_rate - v.miss_rate),
         std::abs(u.brier_min_fde - v.brier_min_fde)});
    }
  }

  auto cfg = lab.base(kEnsemble);
  cfg.model.seed = 1;
  cfg.train.seed = 1;
  model::TrajectoryModel again(cfg.model);
  app::train(again, cfg, lab.scenes("mixed", false, kEnsemble), val);
  const auto & first = *members[1];
  const bool retrain_equal =
    nc::encode_checkpoint(again.parameters(), "") == nc::encode_checkpoint(first.parameters(), "");

  return {
    shape_ok && prob_gap <= 1e-9 && degenerate <= 1e-9 && bytes_equal && retrain_equal,
    "6 modes per agent: " + std::string(shape_ok ? "yes" : "NO") + "; max |sum p - 1| " + sci(prob_gap) +
      "; identical-member ensemble vs single max diff " + sci(degenerate) + " (<= 1e-9); repeat ensemble byte-exact: " +
      (bytes_equal ? "yes" : "NO") + "; retrained member byte-exact: " + (retrain_equal ? "yes" : "NO") +
      "; ensemble minFDE_6 " + fix(merged.mean().at(6).min_fde) + " vs member mean " + fix(single_mean)};
}

struct Criterion
{
  int id;
  const char * name;
  std::function<Outcome(Lab &)> run;
};

}  // namespace

int main(int argc, char ** argv)
{
  const std::vector<Criterion> criteria = {
    {1, "gradient fidelity", gradient_fidelity},
    {2, "geometry round trips", geometry_round_trips},
    {3, "metric oracle equivalence", metric_oracle},
    {4, "RET structure", ret_structure},
    {5, "encoder symmetries", encoder_symmetries},
    {6, "loss correctness", loss_correctness},
    {7, "training convergence", training_convergence},
    {8, "coordinate-system ablation direction", coordinate_ablation},
    {9, "refinement-depth ablation direction", refinement_depth},
    {10, "loss-branch ablation direction", loss_ablation},
    {11, "ensembling", ensembling},
  };
  std::set<int> selected;
  for (int i = 1; i < argc; ++i) {
    selected.insert(std::stoi(argv[i]));
  }

  Lab lab;
  int failures = 0;
  for (const auto & c : criteria) {
    if (!selected.empty() && selected.count(c.id) == 0) {
      continue;
    }
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run(lab);
    } catch (const std::exception & e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failures += o.pass ? 0 : 1;
    std::printf(
      "C%d %s %s (%.1f s): %s\n", c.id, o.pass ? "PASS" : "FAIL", c.name, seconds_since(t0), o.detail.c_str());
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
