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

#include "polarcast/numcore/nn.hpp"

#include <cmath>

#include "polarcast/error.hpp"

namespace polarcast::nc
{

Tensor uniform_init(Shape shape, std::size_t fan_in, Rng & rng)
{
  Tensor t(std::move(shape));
  const double bound = 1.0 / std::sqrt(static_cast<double>(std::max<std::size_t>(fan_in, 1)));
  std::uniform_real_distribution<double> dist(-bound, bound);
  for (auto & v : t.values()) {
    v = dist(rng);
  }
  return t;
}

Tensor normal_init(Shape shape, double stddev, Rng & rng)
{
  Tensor t(std::move(shape));
  std::normal_distribution<double> dist(0.0, stddev);
  for (auto & v : t.values()) {
    v = dist(rng);
  }
  return t;
}

Linear Linear::create(
  ParameterStore & store, const std::string & name, std::size_t in, std::size_t out, Rng & rng,
  bool with_bias)
{
  Linear l;
  l.weight = &store.create(name + ".weight", uniform_init({in, out}, in, rng));
  if (with_bias) {
    l.bias = &store.create(name + ".bias", uniform_init({out}, in, rng));
  }
  return l;
}

Var Linear::operator()(Graph & g, Var x) const
{
  return linear(x, g.param(*weight), bias ? g.param(*bias) : Var{});
}

void Linear::zero()
{
  weight->value.fill(0.0);
  if (bias) {
    bias->value.fill(0.0);
  }
}

LayerNorm LayerNorm::create(ParameterStore & store, const std::string & name, std::size_t dim)
{
  LayerNorm n;
  n.gain = &store.create(name + ".gain", Tensor({dim}, 1.0));
  n.bias = &store.create(name + ".bias", Tensor({dim}, 0.0));
  return n;
}

Var LayerNorm::operator()(Graph & g, Var x) const
{
  return layer_norm(x, g.param(*gain), g.param(*bias));
}

Mlp Mlp::create(
  ParameterStore & store, const std::string & name, const std::vector<std::size_t> & dims, Rng & rng,
  double dropout, bool output_bias)
{
  if (dims.size() < 2) {
    throw ConfigError("mlp '" + name + "' needs at least input and output sizes");
  }
  Mlp m;
  m.dropout = dropout;
  for (std::size_t i = 0; i + 1 < dims.size(); ++i) {
    const bool bias = output_bias || i + 2 < dims.size();
    m.layers.push_back(Linear::create(store, name + "." + std::to_string(i), dims[i], dims[i + 1], rng, bias));
  }
  return m;
}

Var Mlp::operator()(Graph & g, Var x) const
{
  for (std::size_t i = 0; i < layers.size(); ++i) {
    x = layers[i](g, x);
    if (i + 1 < layers.size()) {
      x = nc::dropout(gelu(x), dropout);
    }
  }
  return x;
}

}  // namespace polarcast::nc
