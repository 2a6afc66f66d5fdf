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

#ifndef POLARCAST__GEOMETRY__POLAR_HPP_
#define POLARCAST__GEOMETRY__POLAR_HPP_

#include <array>

namespace polarcast::geometry
{

// Radii below this are treated as the origin.
inline constexpr double kOriginRadius = 1e-9;

struct Vec2
{
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const Vec2 &, const Vec2 &) = default;
};

/**
 * @brief Position as radius and angle.
 *
 * r >= 0, theta in (-pi, pi]; the origin is always (0, 0).
 */
struct PolarPoint
{
  double r = 0.0;
  double theta = 0.0;

  friend bool operator==(const PolarPoint &, const PolarPoint &) = default;
};

// Network form of a polar quantity: (r, cos theta, sin theta).
struct PolarFeature
{
  double r = 0.0;
  double cos_theta = 1.0;
  double sin_theta = 0.0;

  std::array<double, 3> as_array() const { return {r, cos_theta, sin_theta}; }
  friend bool operator==(const PolarFeature &, const PolarFeature &) = default;
};

// Offset of one keypoint relative to another: (delta r, cos dtheta, sin dtheta).
struct RelativePolar
{
  double delta_r = 0.0;
  double cos_dtheta = 1.0;
  double sin_dtheta = 0.0;

  std::array<double, 3> as_array() const { return {delta_r, cos_dtheta, sin_dtheta}; }
  friend bool operator==(const RelativePolar &, const RelativePolar &) = default;
};

// Maps any finite angle into (-pi, pi]; -pi itself maps to +pi.
double wrap_angle(double a);

// Throws ValidationError on non-finite input.
PolarPoint cart_to_polar(double x, double y);
inline PolarPoint cart_to_polar(Vec2 p) { return cart_to_polar(p.x, p.y); }
Vec2 polar_to_cart(const PolarPoint & p);

PolarFeature to_feature(const PolarPoint & p);
PolarPoint from_feature(const PolarFeature & f);

// Signed radial difference k.r - q.r and wrapped angular difference k - q.
RelativePolar relative_polar(const PolarPoint & q, const PolarPoint & k);

// Cartesian offset k - q, the relative feature of the Cartesian ablation.
Vec2 relative_cartesian(const PolarPoint & q, const PolarPoint & k);

// Rigid 2-D pose: translation then heading.
struct Pose2
{
  double x = 0.0;
  double y = 0.0;
  double heading = 0.0;

  // World point into this frame.
  Vec2 to_local(Vec2 world) const;
  // Frame point back to world.
  Vec2 to_world(Vec2 local) const;
  // Rotate a free vector (velocity, acceleration) into / out of the frame.
  Vec2 rotate_to_local(Vec2 v) const;
  Vec2 rotate_to_world(Vec2 v) const;

  friend bool operator==(const Pose2 &, const Pose2 &) = default;
};

}  // namespace polarcast::geometry

#endif  // POLARCAST__GEOMETRY__POLAR_HPP_
