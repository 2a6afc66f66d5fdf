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

#include "polarcast/evalkit/baseline.hpp"

#include "polarcast/error.hpp"

namespace polarcast::evalkit
{

scene::TrajectoryBundle constant_velocity_bundle(const scene::Scene & s, std::size_t modes)
{
  if (modes == 0) {
    throw ValidationError("constant_velocity_bundle: modes must be positive");
  }
  scene::TrajectoryBundle b(modes, s.num_aoi(), s.fut_len, "final");
  for (std::size_t n = 0; n < s.num_aoi(); ++n) {
    const auto & now = s.agent(s.aoi[n], s.hist_len - 1);
    const auto p = geometry::polar_to_cart(geometry::from_feature(now.position));
    const auto v = geometry::polar_to_cart(geometry::from_feature(now.velocity));
    for (std::size_t t = 0; t < s.fut_len; ++t) {
      const double h = s.dt * static_cast<double>(t + 1);
      const auto q = geometry::cart_to_polar(p.x + v.x * h, p.y + v.y * h);
      for (std::size_t m = 0; m < modes; ++m) {
        b.at(m, n, t) = q;
      }
    }
    for (std::size_t m = 0; m < modes; ++m) {
      b.prob(m, n) = 1.0 / static_cast<double>(modes);
    }
  }
  return b;
}

}  // namespace polarcast::evalkit
