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

#include "polarcast/evalkit/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>

#include "polarcast/error.hpp"
#include "polarcast/scene/io.hpp"

namespace polarcast::evalkit
{

const KMetrics & MetricReport::at(std::size_t k) const
{
  for (const auto & v : values) {
    if (v.k == k) {
      return v;
    }
  }
  throw ValidationError("metric report has no k = " + std::to_string(k));
}

std::vector<std::size_t> default_ks(std::size_t modes)
{
  if (modes <= 1) {
    return {1};
  }
  return {1, std::min<std::size_t>(6, modes)};
}

MetricReport compute_metrics(
  const TrajectoryBundle & b, const std::vector<PolarPoint> & gt, const std::vector<std::size_t> & ks)
{
  if (gt.size() != b.agents * b.steps || b.agents == 0 || b.steps == 0) {
    throw ValidationError(
      "compute_metrics: ground truth has " + std::to_string(gt.size()) + " points for " + std::to_string(b.agents) +
      " agents x " + std::to_string(b.steps) + " steps");
  }
  for (auto k : ks) {
    if (k == 0 || k > b.modes) {
      throw ValidationError(
        "compute_metrics: k = " + std::to_string(k) + " outside [1, K = " + std::to_string(b.modes) + "]");
    }
  }

  MetricReport report;
  for (auto k : ks) {
    report.values.push_back({k, 0.0, 0.0, 0.0, 0.0});
  }
  std::vector<double> ade(b.modes);
  std::vector<double> fde(b.modes);
  std::vector<std::size_t> order(b.modes);
  for (std::size_t n = 0; n < b.agents; ++n) {
    for (std::size_t m = 0; m < b.modes; ++m) {
      double total = 0.0;
      for (std::size_t t = 0; t < b.steps; ++t) {
        const auto p = geometry::polar_to_cart(b.at(m, n, t));
        const auto q = geometry::polar_to_cart(gt[n * b.steps + t]);
        const double d = std::hypot(p.x - q.x, p.y - q.y);
        total += d;
        if (t + 1 == b.steps) {
          fde[m] = d;
        }
      }
      ade[m] = total / static_cast<double>(b.steps);
    }
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t c) { return b.prob(a, n) > b.prob(c, n); });
    for (auto & v : report.values) {
      double best_ade = ade[order[0]];
      std::size_t best_fde = order[0];
      for (std::size_t i = 1; i < v.k; ++i) {
        best_ade = std::min(best_ade, ade[order[i]]);
        if (fde[order[i]] < fde[best_fde]) {
          best_fde = order[i];
        }
      }
      const double p = b.prob(best_fde, n);
      v.min_ade += best_ade;
      v.min_fde += fde[best_fde];
      v.miss_rate += fde[best_fde] > kMissThreshold ? 1.0 : 0.0;
      v.brier_min_fde += fde[best_fde] + (1.0 - p) * (1.0 - p);
    }
  }
  const double inv = 1.0 / static_cast<double>(b.agents);
  for (auto & v : report.values) {
    v.min_ade *= inv;
    v.min_fde *= inv;
    v.miss_rate *= inv;
    v.brier_min_fde *= inv;
  }
  return report;
}

void MetricTable::add(std::string id, MetricReport r)
{
  ids.push_back(std::move(id));
  rows.push_back(std::move(r));
}

MetricReport MetricTable::mean() const
{
  if (rows.empty()) {
    throw ValidationError("metric table is empty");
  }
  MetricReport out;
  for (const auto & v : rows.front().values) {
    out.values.push_back({v.k, 0.0, 0.0, 0.0, 0.0});
  }
  for (const auto & r : rows) {
    if (r.values.size() != out.values.size()) {
      throw ValidationError("metric table rows evaluate different k");
    }
    for (std::size_t i = 0; i < r.values.size(); ++i) {
      if (r.values[i].k != out.values[i].k) {
        throw ValidationError("metric table rows evaluate different k");
      }
      out.values[i].min_ade += r.values[i].min_ade;
      out.values[i].min_fde += r.values[i].min_fde;
      out.values[i].miss_rate += r.values[i].miss_rate;
      out.values[i].brier_min_fde += r.values[i].brier_min_fde;
    }
  }
  const double inv = 1.0 / static_cast<double>(rows.size());
  for (auto & v : out.values) {
    v.min_ade *= inv;
    v.min_fde *= inv;
    v.miss_rate *= inv;
    v.brier_min_fde *= inv;
  }
  return out;
}

namespace
{

std::string number(double v)
{
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string csv_row(const std::string & id, const MetricReport & r)
{
  std::string line = id;
  for (const auto & v : r.values) {
    line += "," + number(v.min_ade) + "," + number(v.min_fde) + "," + number(v.miss_rate) + "," +
            number(v.brier_min_fde);
  }
  return line + "\n";
}

}  // namespace

std::string metrics_csv(const MetricTable & t)
{
  const MetricReport mean = t.mean();
  std::string out = "scene";
  for (const auto & v : mean.values) {
    const std::string k = std::to_string(v.k);
    out += ",minADE_" + k + ",minFDE_" + k + ",MR_" + k + ",b-minFDE_" + k;
  }
  out += "\n";
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    out += csv_row(t.ids[i], t.rows[i]);
  }
  return out + csv_row("mean", mean);
}

void write_metrics_csv(const std::filesystem::path & path, const MetricTable & t)
{
  scene::write_text(path, metrics_csv(t));
}

}  // namespace polarcast::evalkit
