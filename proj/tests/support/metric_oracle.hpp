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

#ifndef POLARCAST__TESTS__SUPPORT__METRIC_ORACLE_HPP_
#define POLARCAST__TESTS__SUPPORT__METRIC_ORACLE_HPP_

#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "polarcast/evalkit/metrics.hpp"
#include "polarcast/scene/bundle.hpp"

namespace polarcast::testing_support
{

using evalkit::KMetrics;
using geometry::PolarPoint;
using scene::TrajectoryBundle;

struct Case
{
  TrajectoryBundle bundle;
  std::vector<PolarPoint> gt;
};

inline Case random_case(std::mt19937_64 & rng, std::size_t max_k = 6, std::size_t max_t = 30)
{
  std::uniform_int_distribution<std::size_t> kd(1, max_k);
  std::uniform_int_distribution<std::size_t> td(1, max_t);
  std::uniform_int_distribution<std::size_t> nd(1, 4);
  std::uniform_real_distribution<double> r(0.0, 60.0);
  std::uniform_real_distribution<double> th(-std::numbers::pi, std::numbers::pi);
  std::uniform_real_distribution<double> jitter(-3.0, 3.0);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Case c;
  c.bundle = TrajectoryBundle(kd(rng), nd(rng), td(rng), "final");
  auto & b = c.bundle;
  c.gt.resize(b.agents * b.steps);
  for (auto & p : c.gt) {
    p = {r(rng), th(rng)};
  }
  for (std::size_t m = 0; m < b.modes; ++m) {
    for (std::size_t n = 0; n < b.agents; ++n) {
      for (std::size_t t = 0; t < b.steps; ++t) {
        const auto g = geometry::polar_to_cart(c.gt[n * b.steps + t]);
        b.at(m, n, t) = geometry::cart_to_polar(g.x + jitter(rng), g.y + jitter(rng));
      }
    }
  }
  // Coarse probabilities so ties in the ranking occur regularly.
  const bool coarse = u(rng) < 0.3;
  for (std::size_t n = 0; n < b.agents; ++n) {
    double s = 0.0;
    for (std::size_t m = 0; m < b.modes; ++m) {
      b.prob(m, n) = coarse ? std::floor(u(rng) * 3.0) + 1.0 : u(rng) + 1e-3;
      s += b.prob(m, n);
    }
    for (std::size_t m = 0; m < b.modes; ++m) {
      b.prob(m, n) /= s;
    }
  }
  return c;
}

// Independent oracle: a mode is in the top k when fewer than k modes precede
// it in (descending probability, ascending index) order.
inline KMetrics brute_force(const TrajectoryBundle & b, const std::vector<PolarPoint> & gt, std::size_t k)
{
  KMetrics out;
  out.k = k;
  for (std::size_t n = 0; n < b.agents; ++n) {
    double best_ade = 1e300;
    double best_fde = 1e300;
    double best_fde_prob = 0.0;
    for (std::size_t m = 0; m < b.modes; ++m) {
      std::size_t ahead = 0;
      for (std::size_t o = 0; o < b.modes; ++o) {
        if (b.prob(o, n) > b.prob(m, n) || (b.prob(o, n) == b.prob(m, n) && o < m)) {
          ++ahead;
        }
      }
      if (ahead >= k) {
        continue;
      }
      std::vector<double> err;
      for (std::size_t t = 0; t < b.steps; ++t) {
        const double px = b.at(m, n, t).r * std::cos(b.at(m, n, t).theta);
        const double py = b.at(m, n, t).r * std::sin(b.at(m, n, t).theta);
        const auto & g = gt[n * b.steps + t];
        const double dx = px - g.r * std::cos(g.theta);
        const double dy = py - g.r * std::sin(g.theta);
        err.push_back(std::sqrt(dx * dx + dy * dy));
      }
      double sum = 0.0;
      for (double e : err) {
        sum += e;
      }
      best_ade = std::min(best_ade, sum / static_cast<double>(err.size()));
      if (err.back() < best_fde) {
        best_fde = err.back();
        best_fde_prob = b.prob(m, n);
      }
    }
    out.min_ade += best_ade / static_cast<double>(b.agents);
    out.min_fde += best_fde / static_cast<double>(b.agents);
    out.miss_rate += (best_fde > 2.0 ? 1.0 : 0.0) / static_cast<double>(b.agents);
    out.brier_min_fde += (best_fde + (1.0 - best_fde_prob) * (1.0 - best_fde_prob)) / static_cast<double>(b.agents);
  }
  return out;
}

}  // namespace polarcast::testing_support

#endif  // POLARCAST__TESTS__SUPPORT__METRIC_ORACLE_HPP_
