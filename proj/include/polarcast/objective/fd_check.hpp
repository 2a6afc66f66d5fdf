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

#ifndef POLARCAST__OBJECTIVE__FD_CHECK_HPP_
#define POLARCAST__OBJECTIVE__FD_CHECK_HPP_

#include <cstdint>

#include "polarcast/model/config.hpp"
#include "polarcast/numcore/gradcheck.hpp"
#include "polarcast/objective/loss.hpp"

namespace polarcast::objective
{

struct FdCheckOptions
{
  std::size_t samples_per_tensor = 3;
  double step = 1e-5;
  // Entries with |g| < resolution * eps * |loss| / step are below the
  // roundoff floor of the difference quotient and are compared by absolute
  // error only; zero compares every entry by relative error.
  double resolution = 2e4;
  // Standard deviation of Gaussian noise added to every parameter so that
  // zero-initialised heads carry gradient through later stages.
  double perturb = 0.2;
  // Standard deviation used to redraw parameters that are exactly zero.
  double reinit_zero = 0.1;
  LossConfig loss;
};

// Smallest configuration accepted by finite_difference_check.
model::ModelConfig tiny_config();

/**
 * @brief Central finite-difference check of the full pipeline: encoder,
 * decoder, refinement and the configured loss on a generated tiny scene.
 *
 * Parameters are perturbed (zero tensors redrawn) so that every stage carries
 * gradient. Winners are held at their unperturbed values so every difference
 * stays on one branch of the argmin. Throws ConfigError when the configuration is not
 * tiny (C <= 16, K <= 3, T_h <= 5, T_f <= 5), when dropout is enabled
 * ("stochastic layer active") or when refinement inputs are detached, since
 * finite differences see through a stop-gradient.
 */
nc::GradCheckResult finite_difference_check(
  const model::ModelConfig & config, std::uint64_t seed, const FdCheckOptions & options = {});

}  // namespace polarcast::objective

#endif  // POLARCAST__OBJECTIVE__FD_CHECK_HPP_
