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

#ifndef POLARCAST__NUMCORE__NN_HPP_
#define POLARCAST__NUMCORE__NN_HPP_

#include <random>
#include <string>
#include <vector>

#include "polarcast/numcore/graph.hpp"
#include "polarcast/numcore/ops.hpp"

namespace polarcast::nc
{

using Rng = std::mt19937_64;

// Uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)).
Tensor uniform_init(Shape shape, std::size_t fan_in, Rng & rng);
Tensor normal_init(Shape shape, double stddev, Rng & rng);

struct Linear
{
  Parameter * weight = nullptr;  // [in x out]
  Parameter * bias = nullptr;    // [out], optional

  static Linear create(
    ParameterStore & store, const std::string & name, std::size_t in, std::size_t out, Rng & rng,
    bool with_bias = true);

  std::size_t in() const { return weight->value.dim(0); }
  std::size_t out() const { return weight->value.dim(1); }
  Var operator()(Graph & g, Var x) const;
  // Set weight and bias to zero (used for residual heads).
  void zero();
};

struct LayerNorm
{
  Parameter * gain = nullptr;
  Parameter * bias = nullptr;

  static LayerNorm create(ParameterStore & store, const std::string & name, std::size_t dim);
  Var operator()(Graph & g, Var x) const;
};

// Linear layers with GELU between them (none after the last) and dropout
// after each activation.
struct Mlp
{
  std::vector<Linear> layers;
  double dropout = 0.0;

  static Mlp create(
    ParameterStore & store, const std::string & name, const std::vector<std::size_t> & dims,
    Rng & rng, double dropout = 0.0, bool output_bias = true);

  Var operator()(Graph & g, Var x) const;
};

}  // namespace polarcast::nc

#endif  // POLARCAST__NUMCORE__NN_HPP_
