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

#ifndef POLARCAST__NUMCORE__OPTIM_HPP_
#define POLARCAST__NUMCORE__OPTIM_HPP_

#include <cstddef>
#include <vector>

#include "polarcast/numcore/graph.hpp"

namespace polarcast::nc
{

struct AdamWConfig
{
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double weight_decay = 0.01;
  // Global gradient-norm clip; <= 0 disables.
  double clip_norm = 0.0;
};

/**
 * @brief Adam with decoupled weight decay.
 *
 * Decay applies to parameters of rank >= 2 only (weights, embeddings), not to
 * biases or normalization gains.
 */
class AdamW
{
public:
  AdamW(ParameterStore & store, AdamWConfig config);

  // One update using the gradients currently held by the store, scaled by
  // `grad_scale` (e.g. 1 / batch size), at learning rate `lr`.
  void step(double lr, double grad_scale = 1.0);
  std::size_t steps() const { return t_; }

private:
  ParameterStore & store_;
  AdamWConfig config_;
  std::vector<Tensor> m_;
  std::vector<Tensor> v_;
  std::size_t t_ = 0;
};

// Linear warm-up followed by cosine decay to zero, evaluated per step.
struct CosineSchedule
{
  double base_lr = 1e-3;
  std::size_t warmup_steps = 0;
  std::size_t total_steps = 1;

  double at(std::size_t step) const;
};

}  // namespace polarcast::nc

#endif  // POLARCAST__NUMCORE__OPTIM_HPP_
