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

#include "polarcast/geometry/polar.hpp"

#include <cmath>
#include <numbers>

#include "polarcast/error.hpp"

namespace polarcast::geometry
{

namespace
{
constexpr double kPi = std::numbers::pi;
constexpr double kTwoPi = 2.0 * std::numbers::pi;
}  // namespace

double wrap_angle(double a)
{
  if (a > -kPi && a <= kPi) {
    return a;
  }
  double w = a - kTwoPi * std::ceil((a - kPi) / kTwoPi);
  // ceil can land one period off when (a - pi) / 2pi rounds across an integer.
  if (w <= -kPi) {
    w += kTwoPi;
  } else if (w > kPi) {
    w -= kTwoPi;
  }
  return w;
}

PolarPoint cart_to_polar(double x, double y)
{
  if (!std::isfinite(x) || !std::isfinite(y)) {
    throw ValidationError("cart_to_polar: non-finite input");
  }
  const double r = std::hypot(x, y);
  if (r < kOriginRadius) {
    return {0.0, 0.0};
  }
  return {r, wrap_angle(std::atan2(y, x))};
}

Vec2 polar_to_cart(const PolarPoint & p) { return {p.r * std::cos(p.theta), p.r * std::sin(p.theta)}; }

PolarFeature to_feature(const PolarPoint & p) { return {p.r, std::cos(p.theta), std::sin(p.theta)}; }

PolarPoint from_feature(const PolarFeature & f)
{
  if (f.r < kOriginRadius) {
    return {0.0, 0.0};
  }
  return {f.r, wrap_angle(std::atan2(f.sin_theta, f.cos_theta))};
}

RelativePolar relative_polar(const PolarPoint & q, const PolarPoint & k)
{
  const double dtheta = wrap_angle(k.theta - q.theta);
  return {k.r - q.r, std::cos(dtheta), std::sin(dtheta)};
}

Vec2 relative_cartesian(const PolarPoint & q, const PolarPoint & k)
{
  const Vec2 a = polar_to_cart(q);
  const Vec2 b = polar_to_cart(k);
  return {b.x - a.x, b.y - a.y};
}

Vec2 Pose2::to_local(Vec2 world) const { return rotate_to_local({world.x - x, world.y - y}); }

Vec2 Pose2::to_world(Vec2 local) const
{
  const Vec2 v = rotate_to_world(local);
  return {v.x + x, v.y + y};
}

Vec2 Pose2::rotate_to_local(Vec2 v) const
{
  const double c = std::cos(heading);
  const double s = std::sin(heading);
  return {c * v.x + s * v.y, -s * v.x + c * v.y};
}

Vec2 Pose2::rotate_to_world(Vec2 v) const
{
  const double c = std::cos(heading);
  const double s = std::sin(heading);
  return {c * v.x - s * v.y, s * v.x + c * v.y};
}

}  // namespace polarcast::geometry
