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
#include <limits>
#include <numbers>
#include <random>

#include "polarcast/error.hpp"
#include "polarcast/objective/fd_check.hpp"
#include "polarcast/objective/loss.hpp"

using namespace polarcast;
using namespace polarcast::objective;
using geometry::PolarPoint;
using nc::Graph;
using nc::Tensor;

namespace
{

constexpr double kPi = std::numbers::pi;

std::vector<PolarPoint> random_gt(std::size_t n, std::size_t t, std::mt19937_64 & rng)
{
  std::uniform_real_distribution<double> r(0.1, 40.0);
  std::uniform_real_distribution<double> th(-3.1, 3.1);
  std::vector<PolarPoint> gt(n * t);
  for (auto & p : gt) {
    p = {r(rng), th(rng)};
  }
  return gt;
}

scene::TrajectoryBundle random_bundle(std::size_t k, std::size_t n, std::size_t t, std::mt19937_64 & rng)
{
  scene::TrajectoryBundle b(k, n, t);
  std::uniform_real_distribution<double> r(0.0, 40.0);
  std::uniform_real_distribution<double> th(-kPi, kPi);
  std::uniform_real_distribution<double> u(0.05, 1.0);
  for (auto & p : b.traj) {
    p = {r(rng), th(rng)};
  }
  for (std::size_t a = 0; a < n; ++a) {
    double s = 0.0;
    for (std::size_t m = 0; m < k; ++m) {
      s += (b.prob(m, a) = u(rng));
    }
    for (std::size_t m = 0; m < k; ++m) {
      b.prob(m, a) /= s;
    }
  }
  return b;
}

// Bundle whose every mode copies the ground truth.
scene::TrajectoryBundle exact_bundle(const std::vector<PolarPoint> & gt, std::size_t k, std::size_t n, std::size_t t)
{
  scene::TrajectoryBundle b(k, n, t);
  for (std::size_t m = 0; m < k; ++m) {
    for (std::size_t a = 0; a < n; ++a) {
      for (std::size_t s = 0; s < t; ++s) {
        b.at(m, a, s) = gt[a * t + s];
      }
    }
  }
  return b;
}

// Polar stage holding constant waypoints and logits.
model::StageOutput stage_of(
  Graph & g, const std::string & name, const scene::TrajectoryBundle & b, const Tensor & logits)
{
  Tensor r({b.modes * b.agents, b.steps});
  Tensor th({b.modes * b.agents, b.steps});
  for (std::size_t i = 0; i < b.traj.size(); ++i) {
    r[i] = b.traj[i].r;
    th[i] = b.traj[i].theta;
  }
  return model::polar_stage(name, g.constant(r), g.constant(th), g.constant(logits), b.modes, b.agents);
}

// Logits that put all probability on `winner` for every agent.
Tensor certain_logits(std::size_t n, std::size_t k, const std::vector<std::size_t> & winner)
{
  Tensor l({n, k}, -1000.0);
  for (std::size_t a = 0; a < n; ++a) {
    l[a * k + winner[a]] = 0.0;
  }
  return l;
}

std::vector<std::size_t> brute_force_winners(
  const scene::TrajectoryBundle & b, const std::vector<PolarPoint> & gt)
{
  std::vector<std::size_t> w(b.agents);
  for (std::size_t a = 0; a < b.agents; ++a) {
    std::vector<double> err(b.modes, 0.0);
    for (std::size_t m = 0; m < b.modes; ++m) {
      for (std::size_t s = 0; s < b.steps; ++s) {
        const auto & p = b.at(m, a, s);
        const auto & q = gt[a * b.steps + s];
        const double dx = p.r * std::cos(p.theta) - q.r * std::cos(q.theta);
        const double dy = p.r * std::sin(p.theta) - q.r * std::sin(q.theta);
        err[m] += std::sqrt(dx * dx + dy * dy) / static_cast<double>(b.steps);
      }
    }
    for (std::size_t m = 1; m < b.modes; ++m) {
      if (err[m] < err[w[a]]) {
        w[a] = m;
      }
    }
  }
  return w;
}

}  // namespace

TEST_CASE("a single mode always wins")
{
  std::mt19937_64 rng(1);
  for (int i = 0; i < 50; ++i) {
    const auto b = random_bundle(1, 3, 4, rng);
    for (auto w : winner_take_all(b, random_gt(3, 4, rng))) {
      CHECK(w == 0);
    }
  }
}

TEST_CASE("the mode equal to the ground truth wins")
{
  std::mt19937_64 rng(2);
  const auto gt = random_gt(2, 5, rng);
  auto b = random_bundle(6, 2, 5, rng);
  for (std::size_t s = 0; s < 5; ++s) {
    b.at(4, 0, s) = gt[s];
    b.at(1, 1, s) = gt[5 + s];
  }
  CHECK(winner_take_all(b, gt) == std::vector<std::size_t>{4, 1});
}

TEST_CASE("winner-take-all matches an exhaustive scan")
{
  std::mt19937_64 rng(3);
  for (int i = 0; i < 500; ++i) {
    const std::size_t k = 1 + rng() % 6;
    const std::size_t n = 1 + rng() % 3;
    const std::size_t t = 1 + rng() % 30;
    const auto b = random_bundle(k, n, t, rng);
    const auto gt = random_gt(n, t, rng);
    const auto w = winner_take_all(b, gt);
    CHECK(w == brute_force_winners(b, gt));
    Graph g;
    CHECK(winner_take_all(stage_of(g, "proposal", b, Tensor({n, k})), gt) == w);
  }
}

TEST_CASE("ties go to the lowest mode index")
{
  std::mt19937_64 rng(4);
  const auto gt = random_gt(1, 3, rng);
  scene::TrajectoryBundle b(4, 1, 3);
  for (std::size_t m = 0; m < 4; ++m) {
    for (std::size_t s = 0; s < 3; ++s) {
      b.at(m, 0, s) = {gt[s].r + (m == 0 ? 2.0 : 1.0), gt[s].theta};
    }
  }
  CHECK(winner_take_all(b, gt) == std::vector<std::size_t>{1});
}

TEST_CASE("winners are invariant to a common rescaling of the errors")
{
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> off(-3.0, 3.0);
  for (int i = 0; i < 100; ++i) {
    const auto gt = random_gt(2, 6, rng);
    std::vector<geometry::Vec2> offsets(4 * 2 * 6);
    for (auto & o : offsets) {
      o = {off(rng), off(rng)};
    }
    std::vector<std::size_t> first;
    for (double scale : {0.01, 1.0, 7.5}) {
      scene::TrajectoryBundle b(4, 2, 6);
      for (std::size_t m = 0; m < 4; ++m) {
        for (std::size_t a = 0; a < 2; ++a) {
          for (std::size_t s = 0; s < 6; ++s) {
            const auto q = geometry::polar_to_cart(gt[a * 6 + s]);
            const auto & o = offsets[(m * 2 + a) * 6 + s];
            b.at(m, a, s) = geometry::cart_to_polar(q.x + scale * o.x, q.y + scale * o.y);
          }
        }
      }
      const auto w = winner_take_all(b, gt);
      if (first.empty()) {
        first = w;
      }
      CHECK(w == first);
    }
  }
}

TEST_CASE("regression is zero at the ground truth in both branches")
{
  std::mt19937_64 rng(6);
  const auto gt = random_gt(3, 7, rng);
  const auto b = exact_bundle(gt, 4, 3, 7);
  const std::vector<std::size_t> w = {0, 2, 3};
  CHECK(regression_loss(b, gt, w, Coordinate::kPolar) == 0.0);
  CHECK(regression_loss(b, gt, w, Coordinate::kCartesian) == 0.0);
}

TEST_CASE("a 0.5 m offset costs 0.125 per element")
{
  const std::size_t n = 2;
  const std::size_t t = 4;
  std::vector<PolarPoint> gt(n * t);
  for (std::size_t i = 0; i < gt.size(); ++i) {
    gt[i] = {1.25 * static_cast<double>(i + 1), 0.0};
  }
  Tensor x({n, t});
  Tensor y({n, t});
  for (std::size_t i = 0; i < gt.size(); ++i) {
    x[i] = gt[i].r + 0.5;
  }
  Graph g;
  const auto one_dim = model::cartesian_stage("proposal", g.constant(x), g.constant(y), g.constant(Tensor({n, 1})), 1, n);
  CHECK(regression_loss(one_dim, gt, {0, 0}, Coordinate::kCartesian).value()[0] == 0.125 / 2.0);
  for (auto & v : y.values()) {
    v = -0.5;
  }
  const auto both = model::cartesian_stage("proposal", g.constant(x), g.constant(y), g.constant(Tensor({n, 1})), 1, n);
  CHECK(regression_loss(both, gt, {0, 0}, Coordinate::kCartesian).value()[0] == 0.125);
}

TEST_CASE("the polar angle term ignores whole turns")
{
  std::mt19937_64 rng(7);
  const std::size_t t = 5;
  std::vector<PolarPoint> gt(t);
  const double dyadic[] = {0.5, -1.25, 2.75, -3.0, 0.0};
  for (std::size_t s = 0; s < t; ++s) {
    gt[s] = {3.0 + static_cast<double>(s), dyadic[s]};
  }
  Tensor r({1, t});
  Tensor th({1, t});
  for (std::size_t s = 0; s < t; ++s) {
    r[s] = gt[s].r;
    th[s] = gt[s].theta + 2.0 * kPi;
  }
  Graph g;
  auto st = model::polar_stage("proposal", g.constant(r), g.constant(th), g.constant(Tensor({1, 1})), 1, 1);
  CHECK(regression_loss(st, gt, {0}, Coordinate::kPolar).value()[0] == 0.0);

  const auto rgt = random_gt(1, t, rng);
  for (int turns : {-3, -1, 1, 2, 5}) {
    for (std::size_t s = 0; s < t; ++s) {
      r[s] = rgt[s].r;
      th[s] = rgt[s].theta + 2.0 * kPi * turns;
    }
    auto rs = model::polar_stage("proposal", g.constant(r), g.constant(th), g.constant(Tensor({1, 1})), 1, 1);
    CHECK(regression_loss(rs, rgt, {0}, Coordinate::kPolar).value()[0] < 1e-28);
  }
}

TEST_CASE("classification loss examples")
{
  Graph g;
  Tensor r({6, 2}, 1.0);
  auto uniform = model::polar_stage("proposal", g.constant(r), g.constant(Tensor({6, 2})), g.constant(Tensor({1, 6})), 6, 1);
  CHECK(classification_loss(uniform, {3}).value()[0] == std::log(6.0));

  auto certain =
    model::polar_stage("proposal", g.constant(r), g.constant(Tensor({6, 2})), g.constant(certain_logits(1, 6, {2})), 6, 1);
  CHECK(classification_loss(certain, {2}).value()[0] == 0.0);

  scene::TrajectoryBundle b(6, 1, 2);
  CHECK(std::abs(classification_loss(b, {5}) - std::log(6.0)) < 1e-15);
  for (std::size_t m = 0; m < 6; ++m) {
    b.prob(m, 0) = m == 4 ? 1.0 : 0.0;
  }
  CHECK(classification_loss(b, {4}) == 0.0);

  std::mt19937_64 rng(8);
  for (int i = 0; i < 100; ++i) {
    const auto rb = random_bundle(5, 3, 2, rng);
    const std::vector<std::size_t> w = {rng() % 5, rng() % 5, rng() % 5};
    const double manual =
      -(std::log(rb.prob(w[0], 0)) + std::log(rb.prob(w[1], 1)) + std::log(rb.prob(w[2], 2))) / 3.0;
    CHECK(std::abs(classification_loss(rb, w) - manual) < 1e-14);
  }
}

TEST_CASE("total loss is zero when every stage is exact and certain")
{
  std::mt19937_64 rng(9);
  const auto gt = random_gt(2, 6, rng);
  const auto b = exact_bundle(gt, 3, 2, 6);
  Graph g;
  std::vector<model::StageOutput> stages;
  for (const char * name : {"proposal", "refine0", "refine1"}) {
    stages.push_back(stage_of(g, name, b, certain_logits(2, 3, {0, 0})));
  }
  const auto loss = total_loss(stages, gt);
  CHECK(loss.report.total == 0.0);
  CHECK(loss.report.terms.size() == 3 * 2 * 2);
  for (const auto & t : loss.report.terms) {
    CHECK(t.value == 0.0);
  }
}

TEST_CASE("loss branches and stage selection")
{
  std::mt19937_64 rng(10);
  for (int i = 0; i < 50; ++i) {
    const auto gt = random_gt(2, 5, rng);
    Graph g;
    std::vector<model::StageOutput> stages;
    std::uniform_real_distribution<double> lu(-2.0, 2.0);
    for (const char * name : {"proposal", "refine0", "refine1"}) {
      Tensor logits({2, 4});
      for (auto & v : logits.values()) {
        v = lu(rng);
      }
      stages.push_back(stage_of(g, name, random_bundle(4, 2, 5, rng), logits));
    }
    const auto both = total_loss(stages, gt).report;
    CHECK(both.total >= 0.0);
    CHECK(both.total == both.term_sum());
    for (const auto & w : both.winners) {
      for (auto k : w) {
        CHECK(k < 4);
      }
    }

    LossConfig cart;
    cart.branches = LossBranches::kCartesian;
    const auto c = total_loss(stages, gt, cart).report;
    double cart_sum = 0.0;
    for (const auto & t : both.terms) {
      if (t.coordinate == "cartesian") {
        cart_sum += t.value;
      }
    }
    CHECK(c.total == cart_sum);
    for (const auto & t : c.terms) {
      CHECK(t.coordinate == "cartesian");
    }

    LossConfig polar;
    polar.branches = LossBranches::kPolar;
    CHECK(std::abs(total_loss(stages, gt, polar).report.total + c.total - both.total) < 1e-12);

    LossConfig last;
    last.all_refine_stages = false;
    const auto lr = total_loss(stages, gt, last).report;
    CHECK(lr.stages == std::vector<std::string>{"proposal", "refine1"});
    CHECK(std::abs(lr.total - both.stage_total("proposal") - both.stage_total("refine1")) < 1e-12);

    std::vector<scene::TrajectoryBundle> bundles;
    for (const auto & s : stages) {
      bundles.push_back(s.bundle());
    }
    const auto values = total_loss(bundles, gt);
    CHECK(values.winners == both.winners);
    CHECK(std::abs(values.total - both.total) < 1e-12);
  }
}

TEST_CASE("loss report serializes every term")
{
  std::mt19937_64 rng(11);
  const auto gt = random_gt(1, 3, rng);
  Graph g;
  std::vector<model::StageOutput> stages = {stage_of(g, "proposal", random_bundle(2, 1, 3, rng), Tensor({1, 2}))};
  const auto j = total_loss(stages, gt).report.to_json();
  CHECK(j["terms"].size() == 4);
  CHECK(j["terms"].contains("proposal/polar/reg"));
  CHECK(j["winners"]["proposal"].size() == 1);
  CHECK(j["total"].get<double>() >= 0.0);
}

TEST_CASE("loss shape errors")
{
  std::mt19937_64 rng(12);
  const auto b = random_bundle(3, 2, 4, rng);
  CHECK_THROWS_AS(winner_take_all(b, random_gt(2, 3, rng)), ShapeError);
  CHECK_THROWS_AS(regression_loss(b, random_gt(2, 4, rng), {0, 3}, Coordinate::kPolar), ShapeError);
  CHECK_THROWS_AS(parse_loss_branches("spherical"), ConfigError);
  CHECK(parse_loss_branches("both") == LossBranches::kBoth);
}

TEST_CASE("finite-difference check of the full pipeline")
{
  auto c = tiny_config();
  for (std::uint64_t seed : {0, 1}) {
    const auto res = finite_difference_check(c, seed);
    CHECK(res.max_rel_err < 1e-4);
    CHECK(res.checked > 100);
    CHECK(res.max_abs_err_below_floor <= 1e-4 * res.floor);
  }
}

TEST_CASE("finite-difference check preconditions")
{
  auto c = tiny_config();
  c.dropout = 0.1;
  try {
    finite_difference_check(c, 0);
    FAIL("dropout accepted");
  } catch (const ConfigError & e) {
    CHECK(std::string(e.what()).find("stochastic layer active") != std::string::npos);
  }
  c = tiny_config();
  c.detach_refinement = true;
  CHECK_THROWS_AS(finite_difference_check(c, 0), ConfigError);
  c = tiny_config();
  c.hidden = 32;
  CHECK_THROWS_AS(finite_difference_check(c, 0), ConfigError);
  c = tiny_config();
  c.fut_len = 6;
  CHECK_THROWS_AS(finite_difference_check(c, 0), ConfigError);
}
