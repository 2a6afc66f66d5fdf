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

#include "polarcast/numcore/graph.hpp"

#include <algorithm>
#include <cmath>

#include "polarcast/error.hpp"

namespace polarcast::nc
{

Parameter & ParameterStore::create(const std::string & name, Tensor init)
{
  if (contains(name)) {
    throw ConfigError("parameter '" + name + "' registered twice");
  }
  auto p = std::make_unique<Parameter>();
  p->name = name;
  p->grad = Tensor(init.shape());
  p->value = std::move(init);
  Parameter & ref = *p;
  index_[name] = p.get();
  params_.push_back(std::move(p));
  return ref;
}

Parameter & ParameterStore::get(const std::string & name)
{
  auto * p = find(name);
  if (!p) {
    throw ConfigError("unknown parameter '" + name + "'");
  }
  return *p;
}

const Parameter & ParameterStore::get(const std::string & name) const
{
  auto it = index_.find(name);
  if (it == index_.end()) {
    throw ConfigError("unknown parameter '" + name + "'");
  }
  return *it->second;
}

Parameter * ParameterStore::find(const std::string & name)
{
  auto it = index_.find(name);
  return it == index_.end() ? nullptr : it->second;
}

std::vector<Parameter *> ParameterStore::all()
{
  std::vector<Parameter *> out;
  out.reserve(params_.size());
  for (auto & p : params_) {
    out.push_back(p.get());
  }
  return out;
}

std::vector<const Parameter *> ParameterStore::all() const
{
  std::vector<const Parameter *> out;
  out.reserve(params_.size());
  for (const auto & p : params_) {
    out.push_back(p.get());
  }
  return out;
}

std::size_t ParameterStore::numel() const
{
  std::size_t n = 0;
  for (const auto & p : params_) {
    n += p->value.size();
  }
  return n;
}

void ParameterStore::zero_grad()
{
  for (auto & p : params_) {
    if (p->grad.size() != p->value.size() || p->grad.shape() != p->value.shape()) {
      p->grad = Tensor(p->value.shape());
    } else {
      p->grad.fill(0.0);
    }
  }
}

const Tensor & Var::value() const { return graph->value(*this); }

Graph::Graph(bool training, std::uint64_t seed) : training_(training), rng_(seed) {}

Graph::Node & Graph::node(Var v)
{
  if (v.graph != this || v.id < 0 || static_cast<std::size_t>(v.id) >= nodes_.size()) {
    throw Error("graph: variable does not belong to this record");
  }
  return nodes_[static_cast<std::size_t>(v.id)];
}

const Graph::Node & Graph::node(Var v) const
{
  if (v.graph != this || v.id < 0 || static_cast<std::size_t>(v.id) >= nodes_.size()) {
    throw Error("graph: variable does not belong to this record");
  }
  return nodes_[static_cast<std::size_t>(v.id)];
}

Var Graph::constant(Tensor value)
{
  if (!value.all_finite()) {
    throw NumericError("constant: non-finite value in tensor " + shape_str(value.shape()));
  }
  Node n;
  n.op = "constant";
  n.value = std::move(value);
  nodes_.push_back(std::move(n));
  return Var{this, static_cast<int>(nodes_.size() - 1)};
}

Var Graph::param(Parameter & p)
{
  auto it = param_nodes_.find(&p);
  if (it != param_nodes_.end()) {
    return Var{this, it->second};
  }
  if (!p.value.all_finite()) {
    throw NumericError("parameter '" + p.name + "' holds non-finite values");
  }
  Node n;
  n.op = "parameter";
  n.value = p.value;
  n.param = &p;
  n.requires_grad = true;
  nodes_.push_back(std::move(n));
  const int id = static_cast<int>(nodes_.size() - 1);
  param_nodes_[&p] = id;
  return Var{this, id};
}

Var Graph::record(
  std::string_view op, Tensor value, const std::vector<Var> & inputs, BackwardFn backward)
{
  if (!value.all_finite()) {
    throw NumericError(std::string(op) + ": numeric overflow, non-finite output");
  }
  Node n;
  n.op = op;
  n.value = std::move(value);
  n.inputs.reserve(inputs.size());
  for (const auto & in : inputs) {
    const Node & src = node(in);
    n.inputs.push_back(in.id);
    n.requires_grad = n.requires_grad || src.requires_grad;
  }
  if (n.requires_grad && backward) {
    n.backward = std::move(backward);
  } else {
    n.requires_grad = false;
  }
  nodes_.push_back(std::move(n));
  return Var{this, static_cast<int>(nodes_.size() - 1)};
}

void Graph::backward(Var loss)
{
  Node & root = node(loss);
  if (root.value.size() != 1) {
    throw ShapeError(
      "backward: loss must be a scalar, got shape " + shape_str(root.value.shape()));
  }
  for (auto & n : nodes_) {
    n.grad = Tensor();
  }
  if (!root.requires_grad) {
    return;
  }
  root.grad = Tensor(root.value.shape(), 1.0);

  for (int id = loss.id; id >= 0; --id) {
    Node & n = nodes_[static_cast<std::size_t>(id)];
    if (!n.requires_grad || n.grad.size() == 0) {
      continue;
    }
    if (n.param) {
      Tensor & pg = n.param->grad;
      if (pg.size() != n.value.size() || pg.shape() != n.value.shape()) {
        pg = Tensor(n.value.shape());
      }
      for (std::size_t i = 0; i < pg.size(); ++i) {
        pg[i] += n.grad[i];
      }
      continue;
    }
    if (!n.backward) {
      continue;
    }
    BackwardContext ctx{n.value, n.grad, {}, {}};
    ctx.in_values.reserve(n.inputs.size());
    ctx.in_grads.reserve(n.inputs.size());
    for (int in : n.inputs) {
      Node & src = nodes_[static_cast<std::size_t>(in)];
      ctx.in_values.push_back(&src.value);
      if (src.requires_grad) {
        if (src.grad.size() != src.value.size() || src.grad.shape() != src.value.shape()) {
          src.grad = Tensor(src.value.shape());
        }
        ctx.in_grads.push_back(&src.grad);
      } else {
        ctx.in_grads.push_back(nullptr);
      }
    }
    n.backward(ctx);
  }
}

const Tensor & Graph::value(Var v) const { return node(v).value; }

const Tensor * Graph::grad(Var v) const
{
  const Node & n = node(v);
  const bool allocated = n.grad.size() == n.value.size() && n.grad.shape() == n.value.shape();
  return allocated ? &n.grad : nullptr;
}

bool Graph::requires_grad(Var v) const { return node(v).requires_grad; }

std::string_view Graph::op_name(Var v) const { return node(v).op; }

}  // namespace polarcast::nc
