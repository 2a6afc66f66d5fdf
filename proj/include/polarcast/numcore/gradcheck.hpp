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

#ifndef POLARCAST__NUMCORE__GRADCHECK_HPP_
#define POLARCAST__NUMCORE__GRADCHECK_HPP_

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "polarcast/numcore/graph.hpp"

namespace polarcast::nc
{

struct GradCheckResult
{
  double max_rel_err = 0.0;
  std::string worst;  // "<param>[<index>]" of the largest error
  double worst_analytic = 0.0;
  double worst_numeric = 0.0;
  std::size_t checked = 0;
  // Entries whose analytic gradient lies below the resolvable magnitude are
  // compared by absolute error instead.
  double floor = 0.0;
  std::size_t below_floor = 0;
  std::size_t below_floor_checked = 0;
  double max_abs_err_below_floor = 0.0;
};

// Builds a fresh record, evaluates the scalar loss and, when `with_backward`,
// runs backward so gradients accumulate into the store.
using LossFn = std::function<double(bool with_backward)>;

enum class Stencil
{
  kSecondOrder,  // (f(x+h) - f(x-h)) / 2h
  kFourthOrder,  // (8(f(x+h) - f(x-h)) - (f(x+2h) - f(x-2h))) / 12h
};

/**
 * @brief Compare analytic gradients with central finite differences.
 *
 * Up to `samples_per_tensor` entries of every parameter are checked (all of
 * them when the tensor is smaller). The error per entry is
 * |g_analytic - g_fd| / max(|g_fd|, 1e-8). Entries with |g_analytic| below
 * `min_magnitude` are sampled separately and only contribute to the absolute
 * error statistics.
 */
GradCheckResult check_gradients(
  ParameterStore & store, const LossFn & loss, std::size_t samples_per_tensor, std::uint64_t seed,
  double step = 1e-5, double min_magnitude = 0.0, Stencil stencil = Stencil::kSecondOrder);

struct PrimitiveCheck
{
  std::string name;
  double max_rel_err = 0.0;
  std::string worst;
  double worst_analytic = 0.0;
  double worst_numeric = 0.0;
  double floor = 0.0;
  double max_abs_err_below_floor = 0.0;
};

/**
 * @brief Gradient check of every differentiable primitive on random inputs
 * drawn from `seed`.
 *
 * Each check differentiates sum(op(inputs) * w) for a random projection w
 * and compares all input entries with the fourth-order stencil at step
 * 1e-4. Entries with |g| below 1e7 * eps * max(|L|, 1) / step, where
 * roundoff alone would exceed 1e-7 relative, are compared by absolute error.
 * Inputs of kinked primitives (relu, smooth-L1, wrap) are kept at least 1e-3
 * away from their kinks.
 */
std::vector<PrimitiveCheck> check_primitives(std::uint64_t seed);

}  // namespace polarcast::nc

#endif  // POLARCAST__NUMCORE__GRADCHECK_HPP_
