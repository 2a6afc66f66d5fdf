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

#include "polarcast/evalkit/ensemble.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <random>

#include "polarcast/error.hpp"

namespace polarcast::evalkit
{

namespace
{

double squared_distance(const std::vector<double> & a, const std::vector<double> & b)
{
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return s;
}

std::size_t nearest(const std::vector<std::vector<double>> & centers, const std::vector<double> & p, double * dist)
{
  std::size_t best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t c = 0; c < centers.size(); ++c) {
    const double d = squared_distance(centers[c], p);
    if (d < best_d) {
      best_d = d;
      best = c;
    }
  }
  if (dist != nullptr) {
    *dist = best_d;
  }
  return best;
}

// Member mean computed as the first member plus the mean deviation from it,
// so identical members reproduce their value exactly.
std::vector<double> member_mean(
  const std::vector<std::vector<double>> & points, const std::vector<std::size_t> & members)
{
  const auto & base = points[members.front()];
  std::vector<double> mean = base;
  for (std::size_t i = 0; i < base.size(); ++i) {
    double dev = 0.0;
    for (auto m : members) {
      dev += points[m][i] - base[i];
    }
    mean[i] = base[i] + dev / static_cast<double>(members.size());
  }
  return mean;
}

std::vector<std::vector<double>> seed_centers(
  const std::vector<std::vector<double>> & points, std::size_t k, std::mt19937_64 & rng)
{
  std::vector<std::vector<double>> centers;
  std::vector<std::uint8_t> chosen(points.size(), 0);
  std::uniform_int_distribution<std::size_t> first(0, points.size() - 1);
  std::size_t pick = first(rng);
  centers.push_back(points[pick]);
  chosen[pick] = 1;
  std::vector<double> d2(points.size(), std::numeric_limits<double>::infinity());
  while (centers.size() < k) {
    double total = 0.0;
    for (std::size_t i = 0; i < points.size(); ++i) {
      d2[i] = std::min(d2[i], squared_distance(points[i], centers.back()));
      total += d2[i];
    }
    if (total > 0.0) {
      std::uniform_real_distribution<double> u(0.0, total);
      const double target = u(rng);
      double acc = 0.0;
      pick = points.size();
      for (std::size_t i = 0; i < points.size(); ++i) {
        if (d2[i] <= 0.0) {
          continue;
        }
        acc += d2[i];
        pick = i;
        if (acc >= target) {
          break;
        }
      }
    } else {
      pick = static_cast<std::size_t>(std::find(chosen.begin(), chosen.end(), 0) - chosen.begin());
    }
    centers.push_back(points[pick]);
    chosen[pick] = 1;
  }
  return centers;
}

}  // namespace

double within_cluster_ss(
  const std::vector<std::vector<double>> & points, const std::vector<std::vector<double>> & centers,
  const std::vector<std::size_t> & assignment)
{
  double s = 0.0;
  for (std::size_t i = 0; i < points.size(); ++i) {
    s += squared_distance(points[i], centers[assignment[i]]);
  }
  return s;
}

KMeansResult kmeans(
  const std::vector<std::vector<double>> & points, std::size_t k, std::uint64_t seed, std::size_t max_iterations)
{
  if (k == 0 || points.size() < k) {
    throw ValidationError(
      "kmeans: need at least k = " + std::to_string(k) + " points, got " + std::to_string(points.size()));
  }
  for (const auto & p : points) {
    if (p.size() != points.front().size()) {
      throw ValidationError("kmeans: points differ in dimension");
    }
  }
  std::mt19937_64 rng(seed);
  KMeansResult res;
  res.centers = seed_centers(points, k, rng);
  res.assignment.assign(points.size(), k);
  for (res.iterations = 0; res.iterations < max_iterations; ++res.iterations) {
    bool changed = false;
    for (std::size_t i = 0; i < points.size(); ++i) {
      const std::size_t c = nearest(res.centers, points[i], nullptr);
      changed = changed || c != res.assignment[i];
      res.assignment[i] = c;
    }
    if (!changed) {
      break;
    }
    std::vector<std::vector<std::size_t>> members(k);
    for (std::size_t i = 0; i < points.size(); ++i) {
      members[res.assignment[i]].push_back(i);
    }
    for (std::size_t c = 0; c < k; ++c) {
      if (!members[c].empty()) {
        res.centers[c] = member_mean(points, members[c]);
      }
    }
    for (std::size_t c = 0; c < k; ++c) {
      if (!members[c].empty()) {
        continue;
      }
      std::size_t far = 0;
      double far_d = -1.0;
      for (std::size_t i = 0; i < points.size(); ++i) {
        const double d = squared_distance(points[i], res.centers[res.assignment[i]]);
        if (d > far_d) {
          far_d = d;
          far = i;
        }
      }
      res.centers[c] = points[far];
      res.assignment[far] = c;
    }
  }
  res.wcss = within_cluster_ss(points, res.centers, res.assignment);
  return res;
}

scene::TrajectoryBundle kmeans_ensemble(
  const std::vector<scene::TrajectoryBundle> & bundles, const EnsembleOptions & options)
{
  if (bundles.empty()) {
    throw ValidationError("kmeans_ensemble: no bundles");
  }
  const std::size_t n_agents = bundles.front().agents;
  const std::size_t steps = bundles.front().steps;
  std::size_t total = 0;
  for (const auto & b : bundles) {
    if (b.agents != n_agents || b.steps != steps) {
      throw ValidationError("kmeans_ensemble: bundles differ in agent or step count");
    }
    total += b.modes;
  }
  if (total < options.modes) {
    throw ValidationError(
      "kmeans_ensemble: " + std::to_string(total) + " trajectories per agent, fewer than k = " +
      std::to_string(options.modes));
  }

  scene::TrajectoryBundle out(options.modes, n_agents, steps, "final");
  for (std::size_t n = 0; n < n_agents; ++n) {
    std::vector<std::vector<double>> full;
    std::vector<std::vector<double>> features;
    std::vector<const geometry::PolarPoint *> source;
    std::vector<double> prob;
    for (const auto & b : bundles) {
      for (std::size_t m = 0; m < b.modes; ++m) {
        std::vector<double> xy(2 * steps);
        for (std::size_t t = 0; t < steps; ++t) {
          const auto c = geometry::polar_to_cart(b.at(m, n, t));
          xy[2 * t] = c.x;
          xy[2 * t + 1] = c.y;
        }
        features.push_back(options.endpoint_only ? std::vector<double>(xy.end() - 2, xy.end()) : xy);
        full.push_back(std::move(xy));
        source.push_back(&b.at(m, n, 0));
        prob.push_back(b.prob(m, n));
      }
    }
    const auto km = kmeans(features, options.modes, options.seed, options.max_iterations);

    struct Cluster
    {
      std::vector<std::size_t> members;
      double prob = 0.0;
    };
    std::vector<Cluster> clusters(options.modes);
    double prob_sum = 0.0;
    for (std::size_t i = 0; i < full.size(); ++i) {
      clusters[km.assignment[i]].members.push_back(i);
      clusters[km.assignment[i]].prob += prob[i];
      prob_sum += prob[i];
    }
    std::vector<std::size_t> order(options.modes);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(
      order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return clusters[a].prob > clusters[b].prob; });
    for (std::size_t rank = 0; rank < options.modes; ++rank) {
      const auto & cl = clusters[order[rank]];
      const auto mean = member_mean(full, cl.members);
      const auto & base = full[cl.members.front()];
      for (std::size_t t = 0; t < steps; ++t) {
        const bool same = mean[2 * t] == base[2 * t] && mean[2 * t + 1] == base[2 * t + 1];
        out.at(rank, n, t) =
          same ? source[cl.members.front()][t] : geometry::cart_to_polar(mean[2 * t], mean[2 * t + 1]);
      }
      out.prob(rank, n) = prob_sum > 0.0 ? cl.prob / prob_sum : 1.0 / static_cast<double>(options.modes);
    }
  }
  return out;
}

}  // namespace polarcast::evalkit
