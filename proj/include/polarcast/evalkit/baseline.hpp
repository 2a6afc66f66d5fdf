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

#ifndef POLARCAST__EVALKIT__BASELINE_HPP_
#define POLARCAST__EVALKIT__BASELINE_HPP_

#include "polarcast/scene/bundle.hpp"
#include "polarcast/scene/scene.hpp"

namespace polarcast::evalkit
{

/**
 * @brief Constant-velocity extrapolation of every agent of interest from its
 * current position and velocity.
 *
 * The prediction is repeated over `modes` modes with equal probability so
 * metrics at any k <= modes equal the single-mode metrics.
 */
scene::TrajectoryBundle constant_velocity_bundle(const scene::Scene & s, std::size_t modes = 1);

}  // namespace polarcast::evalkit

#endif  // POLARCAST__EVALKIT__BASELINE_HPP_
