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

#ifndef POLARCAST__NUMCORE__GRAPH_HPP_
#define POLARCAST__NUMCORE__GRAPH_HPP_

#include <cstdint>
#include <deque>
#include <functional>
#include <map>
#include <memory>
#include <random>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "polarcast/numcore/tensor.hpp"

namespace polarcast::nc
{

class Graph;

// Trainable tensor with a gradient slot of identical shape.
struct Parameter
{
  std::string name;
  Tensor value;
  Tensor grad;
};

/**
 * @brief Named parameter registry.
 *
 * Parameters are kept at stable addresses and enumerate in registration
 * order, which fixes checkpoint layout and optimizer traversal order.
 */
class ParameterStore
{
public:
  Parameter & create(const std::string & name, Tensor init);
  Parameter & get(const std::string & name);
  const Parameter & get(const std::string & name) const;
  Parameter * find(const std::string & name);
  bool contains(const std::string & name) const { return index_.count(name) > 0; }

  std::vector<Parameter *> all();
  std::vector<const Parameter *> all() const;
  std::size_t size() const { return params_.size(); }
  std::size_t numel() const;

  void zero_grad();

private:
  std::vector<std::unique_ptr<Parameter>> params_;
  std::map<std::string, Parameter *> index_;
};

// Handle to a value recorded in a Graph.
struct Var
{
  Graph * graph = nullptr;
  int id = -1;

  bool valid() const { return graph != nullptr && id >= 0; }
  const Tensor & value() const;
  const Shape & shape() const { return value().shape(); }
};

// Values handed to a primitive's backward function. `in_grads[i]` is null when
// input i does not require a gradient.
struct BackwardContext
{
  const Tensor & out_value;
  const Tensor & out_grad;
  std::vector<const Tensor *> in_values;
  std::vector<Tensor *> in_grads;
};

using BackwardFn = std::function<void(const BackwardContext &)>;

/**
 * @brief Computation record for reverse-mode differentiation.
 *
 * Operations are appended in execution order, so node ids are a topological
 * order and backward is a single reverse sweep. A record is single-threaded;
 * separate records may share read-only parameters.
 */
class Graph
{
public:
  explicit Graph(bool training = false, std::uint64_t seed = 0);

  Var constant(Tensor value);
  // Leaf bound to a parameter; repeated calls for the same parameter return the
  // same node.
  Var param(Parameter & p);

  // Append an operation. Throws NumericError if `value` has non-finite entries.
  // `backward` may be empty for operations that never propagate gradients.
  Var record(
    std::string_view op, Tensor value, const std::vector<Var> & inputs, BackwardFn backward);

  // Reverse sweep from a scalar. Gradients accumulate into bound parameters.
  void backward(Var loss);

  const Tensor & value(Var v) const;
  const Tensor * grad(Var v) const;
  bool requires_grad(Var v) const;
  std::string_view op_name(Var v) const;

  bool training() const { return training_; }
  std::mt19937_64 & rng() { return rng_; }
  std::size_t size() const { return nodes_.size(); }

private:
  struct Node
  {
    std::string_view op;
    Tensor value;
    Tensor grad;
    std::vector<int> inputs;
    BackwardFn backward;
    Parameter * param = nullptr;
    bool requires_grad = false;
  };

  Node & node(Var v);
  const Node & node(Var v) const;

  std::deque<Node> nodes_;
  std::unordered_map<const Parameter *, int> param_nodes_;
  bool training_;
  std::mt19937_64 rng_;
};

}  // namespace polarcast::nc

#endif  // POLARCAST__NUMCORE__GRAPH_HPP_
