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

#include "polarcast/scene/bundle.hpp"

#include <cmath>
#include <numbers>

#include "polarcast/error.hpp"

namespace polarcast::scene
{

TrajectoryBundle::TrajectoryBundle(std::size_t k, std::size_t n, std::size_t t, std::string stage_name)
: modes(k), agents(n), steps(t), traj(k * n * t), probs(k * n, k == 0 ? 0.0 : 1.0 / static_cast<double>(k)),
  stage(std::move(stage_name))
{
}

void TrajectoryBundle::validate() const
{
  if (traj.size() != modes * agents * steps || probs.size() != modes * agents) {
    throw ValidationError("bundle " + stage + ": storage does not match [K x N x T]");
  }
  for (std::size_t n = 0; n < agents; ++n) {
    double total = 0.0;
    for (std::size_t k = 0; k < modes; ++k) {
      const double p = prob(k, n);
      if (!std::isfinite(p) || p < 0.0) {
        throw ValidationError("bundle " + stage + ": invariant probability >= 0 violated");
      }
      total += p;
    }
    if (std::abs(total - 1.0) > 1e-9) {
      throw ValidationError(
        "bundle " + stage + ": invariant probabilities sum to 1 violated for agent " + std::to_string(n) +
        " (sum " + std::to_string(total) + ")");
    }
  }
  for (const auto & p : traj) {
    if (!std::isfinite(p.r) || !std::isfinite(p.theta)) {
      throw ValidationError("bundle " + stage + ": non-finite waypoint");
    }
    if (p.r < 0.0) {
      throw ValidationError("bundle " + stage + ": invariant r >= 0 violated (r = " + std::to_string(p.r) + ")");
    }
    if (!(p.theta > -std::numbers::pi && p.theta <= std::numbers::pi)) {
      throw ValidationError("bundle " + stage + ": invariant theta in (-pi, pi] violated");
    }
  }
}

std::vector<geometry::PolarPoint> extract_endpoints(const TrajectoryBundle & b)
{
  std::vector<geometry::PolarPoint> out(b.modes * b.agents);
  if (b.steps == 0) {
    return out;
  }
  for (std::size_t k = 0; k < b.modes; ++k) {
    for (std::size_t n = 0; n < b.agents; ++n) {
      out[k * b.agents + n] = b.at(k, n, b.steps - 1);
    }
  }
  return out;
}

}  // namespace polarcast::scene
