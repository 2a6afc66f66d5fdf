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

#include "polarcast/numcore/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

namespace polarcast::nc
{

GradCheckResult check_gradients(
  ParameterStore & store, const LossFn & loss, std::size_t samples_per_tensor, std::uint64_t seed,
  double step, double min_magnitude, Stencil stencil)
{
  store.zero_grad();
  loss(true);
  std::vector<Tensor> analytic;
  for (const auto * p : store.all()) {
    analytic.push_back(p->grad);
  }

  std::mt19937_64 rng(seed);
  GradCheckResult res;
  res.floor = min_magnitude;
  auto params = store.all();
  for (std::size_t pi = 0; pi < params.size(); ++pi) {
    Parameter & p = *params[pi];
    std::vector<std::size_t> resolvable;
    std::vector<std::size_t> small;
    for (std::size_t i = 0; i < p.value.size(); ++i) {
      (std::abs(analytic[pi][i]) >= min_magnitude ? resolvable : small).push_back(i);
    }
    res.below_floor += small.size();
    for (auto * idx : {&resolvable, &small}) {
      if (idx->size() > samples_per_tensor) {
        std::shuffle(idx->begin(), idx->end(), rng);
        idx->resize(samples_per_tensor);
      }
    }
    auto diff = [&](std::size_t i, double h) {
      const double orig = p.value[i];
      p.value[i] = orig + h;
      const double up = loss(false);
      p.value[i] = orig - h;
      const double down = loss(false);
      p.value[i] = orig;
      return up - down;
    };
    auto numeric = [&](std::size_t i) {
      if (stencil == Stencil::kFourthOrder) {
        return (8.0 * diff(i, step) - diff(i, 2.0 * step)) / (12.0 * step);
      }
      return diff(i, step) / (2.0 * step);
    };
    for (auto i : resolvable) {
      const double fd = numeric(i);
      const double err = std::abs(analytic[pi][i] - fd) / std::max(std::abs(fd), 1e-8);
      ++res.checked;
      if (err > res.max_rel_err || res.worst.empty()) {
        res.max_rel_err = std::max(res.max_rel_err, err);
        res.worst = p.name + "[" + std::to_string(i) + "]";
        res.worst_analytic = analytic[pi][i];
        res.worst_numeric = fd;
      }
    }
    for (auto i : small) {
      ++res.below_floor_checked;
      res.max_abs_err_below_floor = std::max(res.max_abs_err_below_floor, std::abs(analytic[pi][i] - numeric(i)));
    }
  }
  return res;
}

}  // namespace polarcast::nc
