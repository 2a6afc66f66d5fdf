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

#include "polarcast/numcore/optim.hpp"

#include <cmath>
#include <numbers>

namespace polarcast::nc
{

AdamW::AdamW(ParameterStore & store, AdamWConfig config) : store_(store), config_(config)
{
  for (const auto * p : store_.all()) {
    m_.emplace_back(p->value.shape());
    v_.emplace_back(p->value.shape());
  }
}

void AdamW::step(double lr, double grad_scale)
{
  ++t_;
  auto params = store_.all();
  double clip = 1.0;
  if (config_.clip_norm > 0.0) {
    double sq = 0.0;
    for (const auto * p : params) {
      for (double g : p->grad.values()) {
        sq += g * g * grad_scale * grad_scale;
      }
    }
    const double norm = std::sqrt(sq);
    if (norm > config_.clip_norm) {
      clip = config_.clip_norm / norm;
    }
  }
  const double b1 = config_.beta1;
  const double b2 = config_.beta2;
  const double bc1 = 1.0 - std::pow(b1, static_cast<double>(t_));
  const double bc2 = 1.0 - std::pow(b2, static_cast<double>(t_));
  for (std::size_t i = 0; i < params.size(); ++i) {
    Parameter & p = *params[i];
    Tensor & m = m_[i];
    Tensor & v = v_[i];
    const bool decay = p.value.rank() >= 2 && config_.weight_decay > 0.0;
    for (std::size_t j = 0; j < p.value.size(); ++j) {
      const double g = p.grad[j] * grad_scale * clip;
      m[j] = b1 * m[j] + (1.0 - b1) * g;
      v[j] = b2 * v[j] + (1.0 - b2) * g * g;
      const double mhat = m[j] / bc1;
      const double vhat = v[j] / bc2;
      if (decay) {
        p.value[j] -= lr * config_.weight_decay * p.value[j];
      }
      p.value[j] -= lr * mhat / (std::sqrt(vhat) + config_.eps);
    }
  }
}

double CosineSchedule::at(std::size_t step) const
{
  if (step < warmup_steps) {
    return base_lr * static_cast<double>(step + 1) / static_cast<double>(warmup_steps);
  }
  if (total_steps <= warmup_steps) {
    return base_lr;
  }
  const double progress =
    static_cast<double>(step - warmup_steps) / static_cast<double>(total_steps - warmup_steps);
  return 0.5 * base_lr * (1.0 + std::cos(std::numbers::pi * std::min(progress, 1.0)));
}

}  // namespace polarcast::nc
