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

#include "polarcast/numcore/ops.hpp"

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <numbers>
#include <random>
#include <string>

#include "polarcast/error.hpp"
#include "polarcast/geometry/polar.hpp"

namespace polarcast::nc
{
namespace
{

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using ConstMap = Eigen::Map<const RowMat>;
using MutMap = Eigen::Map<RowMat>;

ConstMap as_matrix(const Tensor & t, std::size_t rows, std::size_t cols)
{
  return ConstMap(t.data(), static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
}

MutMap as_matrix(Tensor & t, std::size_t rows, std::size_t cols)
{
  return MutMap(t.data(), static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
}

Graph & graph_of(std::string_view op, std::initializer_list<Var> vars)
{
  Graph * g = nullptr;
  for (const auto & v : vars) {
    if (!v.valid()) {
      throw Error(std::string(op) + ": invalid operand");
    }
    if (g && v.graph != g) {
      throw Error(std::string(op) + ": operands belong to different records");
    }
    g = v.graph;
  }
  return *g;
}

[[noreturn]] void shape_fail(std::string_view op, const Shape & a, const Shape & b)
{
  throw ShapeError(std::string(op) + ": incompatible shapes " + shape_str(a) + " and " + shape_str(b));
}

void require_same(std::string_view op, Var a, Var b)
{
  if (a.shape() != b.shape()) {
    shape_fail(op, a.shape(), b.shape());
  }
}

void accumulate(Tensor * dst, const Tensor & src)
{
  if (!dst) {
    return;
  }
  for (std::size_t i = 0; i < src.size(); ++i) {
    (*dst)[i] += src[i];
  }
}

// y = f(x); backward uses df(x, y).
template <class F, class D>
Var unary(std::string_view name, Var a, F f, D df)
{
  Graph & g = graph_of(name, {a});
  const Tensor & x = a.value();
  Tensor y(x.shape());
  for (std::size_t i = 0; i < x.size(); ++i) {
    y[i] = f(x[i]);
  }
  return g.record(name, std::move(y), {a}, [df](const BackwardContext & c) {
    Tensor * gx = c.in_grads[0];
    if (!gx) {
      return;
    }
    const Tensor & xv = *c.in_values[0];
    for (std::size_t i = 0; i < xv.size(); ++i) {
      (*gx)[i] += c.out_grad[i] * df(xv[i], c.out_value[i]);
    }
  });
}

struct AxisSplit
{
  std::size_t outer;
  std::size_t inner;
};

AxisSplit split_at(const Shape & s, std::size_t axis)
{
  AxisSplit r{1, 1};
  for (std::size_t i = 0; i < axis; ++i) {
    r.outer *= s[i];
  }
  for (std::size_t i = axis + 1; i < s.size(); ++i) {
    r.inner *= s[i];
  }
  return r;
}

}  // namespace

Var add(Var a, Var b)
{
  Graph & g = graph_of("add", {a, b});
  require_same("add", a, b);
  Tensor y = a.value();
  const Tensor & bv = b.value();
  for (std::size_t i = 0; i < y.size(); ++i) {
    y[i] += bv[i];
  }
  return g.record("add", std::move(y), {a, b}, [](const BackwardContext & c) {
    accumulate(c.in_grads[0], c.out_grad);
    accumulate(c.in_grads[1], c.out_grad);
  });
}

Var sub(Var a, Var b)
{
  Graph & g = graph_of("sub", {a, b});
  require_same("sub", a, b);
  Tensor y = a.value();
  const Tensor & bv = b.value();
  for (std::size_t i = 0; i < y.size(); ++i) {
    y[i] -= bv[i];
  }
  return g.record("sub", std::move(y), {a, b}, [](const BackwardContext & c) {
    accumulate(c.in_grads[0], c.out_grad);
    if (Tensor * gb = c.in_grads[1]) {
      for (std::size_t i = 0; i < gb->size(); ++i) {
        (*gb)[i] -= c.out_grad[i];
      }
    }
  });
}

Var mul(Var a, Var b)
{
  Graph & g = graph_of("mul", {a, b});
  require_same("mul", a, b);
  Tensor y = a.value();
  const Tensor & bv = b.value();
  for (std::size_t i = 0; i < y.size(); ++i) {
    y[i] *= bv[i];
  }
  return g.record("mul", std::move(y), {a, b}, [](const BackwardContext & c) {
    const Tensor & av = *c.in_values[0];
    const Tensor & bv = *c.in_values[1];
    if (Tensor * ga = c.in_grads[0]) {
      for (std::size_t i = 0; i < ga->size(); ++i) {
        (*ga)[i] += c.out_grad[i] * bv[i];
      }
    }
    if (Tensor * gb = c.in_grads[1]) {
      for (std::size_t i = 0; i < gb->size(); ++i) {
        (*gb)[i] += c.out_grad[i] * av[i];
      }
    }
  });
}

Var add_row(Var a, Var b)
{
  Graph & g = graph_of("add_row", {a, b});
  const Tensor & av = a.value();
  const Tensor & bv = b.value();
  if (bv.rank() != 1 || bv.size() != av.cols()) {
    shape_fail("add_row", av.shape(), bv.shape());
  }
  Tensor y = av;
  const std::size_t cols = av.cols();
  for (std::size_t r = 0; r < av.rows(); ++r) {
    for (std::size_t j = 0; j < cols; ++j) {
      y[r * cols + j] += bv[j];
    }
  }
  return g.record("add_row", std::move(y), {a, b}, [cols](const BackwardContext & c) {
    accumulate(c.in_grads[0], c.out_grad);
    if (Tensor * gb = c.in_grads[1]) {
      const std::size_t rows = cols == 0 ? 0 : c.out_grad.size() / cols;
      for (std::size_t r = 0; r < rows; ++r) {
        for (std::size_t j = 0; j < cols; ++j) {
          (*gb)[j] += c.out_grad[r * cols + j];
        }
      }
    }
  });
}

Var add_broadcast(Var a, Var b)
{
  Graph & g = graph_of("add_broadcast", {a, b});
  const Tensor & av = a.value();
  const Tensor & bv = b.value();
  if (av.rank() != 3 || bv.rank() != 2 || av.dim(1) != bv.dim(0) || av.dim(2) != bv.dim(1)) {
    shape_fail("add_broadcast", av.shape(), bv.shape());
  }
  Tensor y = av;
  const std::size_t block = bv.size();
  const std::size_t outer = av.dim(0);
  for (std::size_t u = 0; u < outer; ++u) {
    for (std::size_t i = 0; i < block; ++i) {
      y[u * block + i] += bv[i];
    }
  }
  return g.record("add_broadcast", std::move(y), {a, b}, [outer, block](const BackwardContext & c) {
    accumulate(c.in_grads[0], c.out_grad);
    if (Tensor * gb = c.in_grads[1]) {
      for (std::size_t u = 0; u < outer; ++u) {
        for (std::size_t i = 0; i < block; ++i) {
          (*gb)[i] += c.out_grad[u * block + i];
        }
      }
    }
  });
}

Var mul_const(Var a, const Tensor & m)
{
  Graph & g = graph_of("mul_const", {a});
  if (m.shape() != a.shape()) {
    shape_fail("mul_const", a.shape(), m.shape());
  }
  Tensor y = a.value();
  for (std::size_t i = 0; i < y.size(); ++i) {
    y[i] *= m[i];
  }
  auto mp = std::make_shared<Tensor>(m);
  return g.record("mul_const", std::move(y), {a}, [mp](const BackwardContext & c) {
    if (Tensor * ga = c.in_grads[0]) {
      for (std::size_t i = 0; i < ga->size(); ++i) {
        (*ga)[i] += c.out_grad[i] * (*mp)[i];
      }
    }
  });
}

Var scale_rows(Var a, const std::vector<double> & s)
{
  Graph & g = graph_of("scale_rows", {a});
  const Tensor & av = a.value();
  if (s.size() != av.rows()) {
    shape_fail("scale_rows", av.shape(), Shape{s.size()});
  }
  const std::size_t cols = av.cols();
  Tensor y = av;
  for (std::size_t r = 0; r < s.size(); ++r) {
    for (std::size_t j = 0; j < cols; ++j) {
      y[r * cols + j] *= s[r];
    }
  }
  return g.record("scale_rows", std::move(y), {a}, [s, cols](const BackwardContext & c) {
    if (Tensor * ga = c.in_grads[0]) {
      for (std::size_t r = 0; r < s.size(); ++r) {
        for (std::size_t j = 0; j < cols; ++j) {
          (*ga)[r * cols + j] += c.out_grad[r * cols + j] * s[r];
        }
      }
    }
  });
}

Var scale(Var a, double s)
{
  return unary("scale", a, [s](double x) { return x * s; }, [s](double, double) { return s; });
}

Var add_scalar(Var a, double s)
{
  return unary("add_scalar", a, [s](double x) { return x + s; }, [](double, double) { return 1.0; });
}

Var neg(Var a)
{
  return unary("neg", a, [](double x) { return -x; }, [](double, double) { return -1.0; });
}

Var matmul(Var a, Var b)
{
  Graph & g = graph_of("matmul", {a, b});
  const Tensor & av = a.value();
  const Tensor & bv = b.value();
  if (av.rank() < 1 || bv.rank() != 2 || av.cols() != bv.dim(0)) {
    shape_fail("matmul", av.shape(), bv.shape());
  }
  const std::size_t m = av.rows();
  const std::size_t k = av.cols();
  const std::size_t n = bv.dim(1);
  Shape out_shape = av.shape();
  out_shape.back() = n;
  Tensor y(out_shape);
  if (m > 0 && n > 0) {
    as_matrix(y, m, n).noalias() = as_matrix(av, m, k) * as_matrix(bv, k, n);
  }
  return g.record("matmul", std::move(y), {a, b}, [m, k, n](const BackwardContext & c) {
    if (m == 0 || n == 0) {
      return;
    }
    auto dy = as_matrix(c.out_grad, m, n);
    if (Tensor * ga = c.in_grads[0]) {
      as_matrix(*ga, m, k).noalias() += dy * as_matrix(*c.in_values[1], k, n).transpose();
    }
    if (Tensor * gb = c.in_grads[1]) {
      as_matrix(*gb, k, n).noalias() += as_matrix(*c.in_values[0], m, k).transpose() * dy;
    }
  });
}

Var linear(Var x, Var w, Var bias)
{
  if (!bias.valid()) {
    return matmul(x, w);
  }
  Graph & g = graph_of("linear", {x, w, bias});
  const Tensor & xv = x.value();
  const Tensor & wv = w.value();
  const Tensor & bv = bias.value();
  if (xv.rank() < 1 || wv.rank() != 2 || xv.cols() != wv.dim(0) || bv.rank() != 1 ||
      bv.size() != wv.dim(1)) {
    throw ShapeError(
      "linear: incompatible shapes x " + shape_str(xv.shape()) + ", weight " +
      shape_str(wv.shape()) + ", bias " + shape_str(bv.shape()));
  }
  const std::size_t m = xv.rows();
  const std::size_t k = xv.cols();
  const std::size_t n = wv.dim(1);
  Shape out_shape = xv.shape();
  out_shape.back() = n;
  Tensor y(out_shape);
  if (m > 0 && n > 0) {
    auto ym = as_matrix(y, m, n);
    ym.noalias() = as_matrix(xv, m, k) * as_matrix(wv, k, n);
    ym.rowwise() += as_matrix(bv, 1, n).row(0);
  }
  return g.record("linear", std::move(y), {x, w, bias}, [m, k, n](const BackwardContext & c) {
    if (m == 0 || n == 0) {
      return;
    }
    auto dy = as_matrix(c.out_grad, m, n);
    if (Tensor * gx = c.in_grads[0]) {
      as_matrix(*gx, m, k).noalias() += dy * as_matrix(*c.in_values[1], k, n).transpose();
    }
    if (Tensor * gw = c.in_grads[1]) {
      as_matrix(*gw, k, n).noalias() += as_matrix(*c.in_values[0], m, k).transpose() * dy;
    }
    if (Tensor * gb = c.in_grads[2]) {
      double * out = gb->data();
      const double * d = c.out_grad.data();
      for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
          out[j] += d[i * n + j];
        }
      }
    }
  });
}

Var transpose(Var a)
{
  Graph & g = graph_of("transpose", {a});
  const Tensor & av = a.value();
  if (av.rank() != 2) {
    throw ShapeError("transpose: expected rank 2, got " + shape_str(av.shape()));
  }
  const std::size_t r = av.dim(0);
  const std::size_t cc = av.dim(1);
  Tensor y({cc, r});
  for (std::size_t i = 0; i < r; ++i) {
    for (std::size_t j = 0; j < cc; ++j) {
      y[j * r + i] = av[i * cc + j];
    }
  }
  return g.record("transpose", std::move(y), {a}, [r, cc](const BackwardContext & c) {
    if (Tensor * ga = c.in_grads[0]) {
      for (std::size_t i = 0; i < r; ++i) {
        for (std::size_t j = 0; j < cc; ++j) {
          (*ga)[i * cc + j] += c.out_grad[j * r + i];
        }
      }
    }
  });
}

Var reshape(Var a, Shape shape)
{
  Graph & g = graph_of("reshape", {a});
  Tensor y = a.value().reshaped(std::move(shape));
  return g.record("reshape", std::move(y), {a}, [](const BackwardContext & c) {
    accumulate(c.in_grads[0], c.out_grad);
  });
}

Var detach(Var a)
{
  Graph & g = graph_of("detach", {a});
  return g.constant(a.value());
}

Var concat(const std::vector<Var> & parts, std::size_t axis)
{
  if (parts.empty()) {
    throw ShapeError("concat: no operands");
  }
  Graph & g = graph_of("concat", {parts.front()});
  const Shape & first = parts.front().shape();
  if (axis >= first.size()) {
    throw ShapeError("concat: axis " + std::to_string(axis) + " out of range for " + shape_str(first));
  }
  Shape out_shape = first;
  out_shape[axis] = 0;
  std::vector<std::size_t> widths;
  for (const auto & p : parts) {
    graph_of("concat", {parts.front(), p});
    const Shape & s = p.shape();
    if (s.size() != first.size()) {
      shape_fail("concat", first, s);
    }
    for (std::size_t i = 0; i < s.size(); ++i) {
      if (i != axis && s[i] != first[i]) {
        shape_fail("concat", first, s);
      }
    }
    out_shape[axis] += s[axis];
    widths.push_back(s[axis]);
  }
  const AxisSplit sp = split_at(first, axis);
  const std::size_t out_stride = out_shape[axis] * sp.inner;
  Tensor y(out_shape);
  std::size_t offset = 0;
  for (std::size_t p = 0; p < parts.size(); ++p) {
    const Tensor & pv = parts[p].value();
    const std::size_t chunk = widths[p] * sp.inner;
    for (std::size_t o = 0; o < sp.outer; ++o) {
      std::copy_n(pv.data() + o * chunk, chunk, y.data() + o * out_stride + offset);
    }
    offset += chunk;
  }
  return g.record("concat", std::move(y), parts, [widths, sp, out_stride](const BackwardContext & c) {
    std::size_t off = 0;
    for (std::size_t p = 0; p < widths.size(); ++p) {
      const std::size_t chunk = widths[p] * sp.inner;
      if (Tensor * gp = c.in_grads[p]) {
        for (std::size_t o = 0; o < sp.outer; ++o) {
          const double * src = c.out_grad.data() + o * out_stride + off;
          double * dst = gp->data() + o * chunk;
          for (std::size_t i = 0; i < chunk; ++i) {
            dst[i] += src[i];
          }
        }
      }
      off += chunk;
    }
  });
}

Var slice(Var a, std::size_t axis, std::size_t start, std::size_t length)
{
  Graph & g = graph_of("slice", {a});
  const Shape & s = a.shape();
  if (axis >= s.size() || start + length > s[axis]) {
    throw ShapeError(
      "slice: range [" + std::to_string(start) + ", " + std::to_string(start + length) +
      ") on axis " + std::to_string(axis) + " exceeds " + shape_str(s));
  }
  Shape out_shape = s;
  out_shape[axis] = length;
  const AxisSplit sp = split_at(s, axis);
  const std::size_t in_stride = s[axis] * sp.inner;
  const std::size_t chunk = length * sp.inner;
  const std::size_t off = start * sp.inner;
  Tensor y(out_shape);
  const Tensor & av = a.value();
  for (std::size_t o = 0; o < sp.outer; ++o) {
    std::copy_n(av.data() + o * in_stride + off, chunk, y.data() + o * chunk);
  }
  return g.record("slice", std::move(y), {a}, [sp, in_stride, chunk, off](const BackwardContext & c) {
    if (Tensor * ga = c.in_grads[0]) {
      for (std::size_t o = 0; o < sp.outer; ++o) {
        for (std::size_t i = 0; i < chunk; ++i) {
          (*ga)[o * in_stride + off + i] += c.out_grad[o * chunk + i];
        }
      }
    }
  });
}

Var gather(Var a, const std::vector<std::size_t> & index)
{
  Graph & g = graph_of("gather", {a});
  const Tensor & av = a.value();
  if (av.rank() < 1) {
    throw ShapeError("gather: scalar operand");
  }
  const std::size_t n = av.dim(0);
  const std::size_t row = n == 0 ? 0 : av.size() / n;
  for (auto i : index) {
    if (i >= n) {
      throw ShapeError(
        "gather: index " + std::to_string(i) + " out of range for " + shape_str(av.shape()));
    }
  }
  Shape out_shape = av.shape();
  out_shape[0] = index.size();
  Tensor y(out_shape);
  for (std::size_t r = 0; r < index.size(); ++r) {
    std::copy_n(av.data() + index[r] * row, row, y.data() + r * row);
  }
  return g.record("gather", std::move(y), {a}, [index, row](const BackwardContext & c) {
    if (Tensor * ga = c.in_grads[0]) {
      for (std::size_t r = 0; r < index.size(); ++r) {
        for (std::size_t j = 0; j < row; ++j) {
          (*ga)[index[r] * row + j] += c.out_grad[r * row + j];
        }
      }
    }
  });
}

Var gelu(Var a)
{
  constexpr double inv_sqrt2 = 0.70710678118654752440;
  constexpr double inv_sqrt2pi = 0.39894228040143267794;
  return unary(
    "gelu", a, [](double x) { return 0.5 * x * (1.0 + std::erf(x * inv_sqrt2)); },
    [](double x, double) {
      return 0.5 * (1.0 + std::erf(x * inv_sqrt2)) + x * inv_sqrt2pi * std::exp(-0.5 * x * x);
    });
}

Var relu(Var a)
{
  return unary(
    "relu", a, [](double x) { return x > 0.0 ? x : 0.0; },
    [](double x, double) { return x > 0.0 ? 1.0 : 0.0; });
}

Var sigmoid(Var a)
{
  return unary(
    "sigmoid", a,
    [](double x) {
      if (x >= 0.0) {
        return 1.0 / (1.0 + std::exp(-x));
      }
      const double e = std::exp(x);
      return e / (1.0 + e);
    },
    [](double, double y) { return y * (1.0 - y); });
}

Var tanh(Var a)
{
  return unary(
    "tanh", a, [](double x) { return std::tanh(x); }, [](double, double y) { return 1.0 - y * y; });
}

Var softplus(Var a)
{
  return unary(
    "softplus", a, [](double x) { return std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x))); },
    [](double x, double) {
      if (x >= 0.0) {
        return 1.0 / (1.0 + std::exp(-x));
      }
      const double e = std::exp(x);
      return e / (1.0 + e);
    });
}

Var exp(Var a)
{
  return unary("exp", a, [](double x) { return std::exp(x); }, [](double, double y) { return y; });
}

Var log(Var a)
{
  return unary(
    "log", a, [](double x) { return std::log(x); }, [](double x, double) { return 1.0 / x; });
}

Var sin(Var a)
{
  return unary(
    "sin", a, [](double x) { return std::sin(x); }, [](double x, double) { return std::cos(x); });
}

Var cos(Var a)
{
  return unary(
    "cos", a, [](double x) { return std::cos(x); }, [](double x, double) { return -std::sin(x); });
}

Var sqrt(Var a, double eps)
{
  return unary(
    "sqrt", a, [eps](double x) { return std::sqrt(x + eps); },
    [](double, double y) { return 0.5 / y; });
}

Var square(Var a)
{
  return unary("square", a, [](double x) { return x * x; }, [](double x, double) { return 2.0 * x; });
}

Var atan2(Var y, Var x, double eps)
{
  Graph & g = graph_of("atan2", {y, x});
  require_same("atan2", y, x);
  const Tensor & yv = y.value();
  const Tensor & xv = x.value();
  Tensor out(yv.shape());
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = std::atan2(yv[i], xv[i]);
  }
  return g.record("atan2", std::move(out), {y, x}, [eps](const BackwardContext & c) {
    const Tensor & yv = *c.in_values[0];
    const Tensor & xv = *c.in_values[1];
    for (std::size_t i = 0; i < yv.size(); ++i) {
      const double d = xv[i] * xv[i] + yv[i] * yv[i] + eps;
      if (Tensor * gy = c.in_grads[0]) {
        (*gy)[i] += c.out_grad[i] * xv[i] / d;
      }
      if (Tensor * gx = c.in_grads[1]) {
        (*gx)[i] -= c.out_grad[i] * yv[i] / d;
      }
    }
  });
}

Var wrap_angle(Var a)
{
  return unary(
    "wrap_angle", a, [](double x) { return geometry::wrap_angle(x); },
    [](double, double) { return 1.0; });
}

Var smooth_l1(Var a, double beta)
{
  return unary(
    "smooth_l1", a,
    [beta](double x) {
      const double ax = std::abs(x);
      return ax < beta ? 0.5 * x * x / beta : ax - 0.5 * beta;
    },
    [beta](double x, double) {
      if (std::abs(x) < beta) {
        return x / beta;
      }
      return x > 0.0 ? 1.0 : -1.0;
    });
}

Var layer_norm(Var x, Var gain, Var bias, double eps)
{
  Graph & g = graph_of("layer_norm", {x, gain, bias});
  const Tensor & xv = x.value();
  const std::size_t cols = xv.cols();
  if (gain.shape() != Shape{cols} || bias.shape() != Shape{cols}) {
    throw ShapeError(
      "layer_norm: input " + shape_str(xv.shape()) + " with gain " + shape_str(gain.shape()) +
      " and bias " + shape_str(bias.shape()));
  }
  const std::size_t rows = xv.rows();
  auto xhat = std::make_shared<Tensor>(xv.shape());
  auto inv_std = std::make_shared<std::vector<double>>(rows);
  const Tensor & gv = gain.value();
  const Tensor & bv = bias.value();
  Tensor y(xv.shape());
  for (std::size_t r = 0; r < rows; ++r) {
    const double * row = xv.data() + r * cols;
    double mu = 0.0;
    for (std::size_t j = 0; j < cols; ++j) {
      mu += row[j];
    }
    mu /= static_cast<double>(cols);
    double var = 0.0;
    for (std::size_t j = 0; j < cols; ++j) {
      var += (row[j] - mu) * (row[j] - mu);
    }
    var /= static_cast<double>(cols);
    const double inv = 1.0 / std::sqrt(var + eps);
    (*inv_std)[r] = inv;
    for (std::size_t j = 0; j < cols; ++j) {
      const double h = (row[j] - mu) * inv;
      (*xhat)[r * cols + j] = h;
      y[r * cols + j] = h * gv[j] + bv[j];
    }
  }
  return g.record(
    "layer_norm", std::move(y), {x, gain, bias}, [xhat, inv_std, rows, cols](const BackwardContext & c) {
      const Tensor & gv = *c.in_values[1];
      Tensor * gx = c.in_grads[0];
      Tensor * gg = c.in_grads[1];
      Tensor * gb = c.in_grads[2];
      const double n = static_cast<double>(cols);
      std::vector<double> dh(cols);
      for (std::size_t r = 0; r < rows; ++r) {
        const double * dy = c.out_grad.data() + r * cols;
        const double * h = xhat->data() + r * cols;
        double sum_dh = 0.0;
        double sum_dh_h = 0.0;
        for (std::size_t j = 0; j < cols; ++j) {
          dh[j] = dy[j] * gv[j];
          sum_dh += dh[j];
          sum_dh_h += dh[j] * h[j];
          if (gg) {
            (*gg)[j] += dy[j] * h[j];
          }
          if (gb) {
            (*gb)[j] += dy[j];
          }
        }
        if (gx) {
          const double inv = (*inv_std)[r];
          for (std::size_t j = 0; j < cols; ++j) {
            (*gx)[r * cols + j] += inv / n * (n * dh[j] - sum_dh - h[j] * sum_dh_h);
          }
        }
      }
    });
}

Var softmax(Var x, const Mask & mask)
{
  Graph & g = graph_of("softmax", {x});
  const Tensor & xv = x.value();
  if (!mask.empty() && mask.size() != xv.size()) {
    throw ShapeError(
      "softmax: mask of " + std::to_string(mask.size()) + " entries for input " +
      shape_str(xv.shape()));
  }
  const std::size_t cols = xv.cols();
  const std::size_t rows = xv.rows();
  Tensor y(xv.shape());
  for (std::size_t r = 0; r < rows; ++r) {
    double mx = -std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < cols; ++j) {
      const std::size_t i = r * cols + j;
      if (mask.empty() || mask[i]) {
        mx = std::max(mx, xv[i]);
      }
    }
    if (!std::isfinite(mx)) {
      continue;
    }
    double z = 0.0;
    for (std::size_t j = 0; j < cols; ++j) {
      const std::size_t i = r * cols + j;
      if (mask.empty() || mask[i]) {
        y[i] = std::exp(xv[i] - mx);
        z += y[i];
      }
    }
    for (std::size_t j = 0; j < cols; ++j) {
      y[r * cols + j] /= z;
    }
  }
  return g.record("softmax", std::move(y), {x}, [rows, cols](const BackwardContext & c) {
    Tensor * gx = c.in_grads[0];
    if (!gx) {
      return;
    }
    for (std::size_t r = 0; r < rows; ++r) {
      const double * p = c.out_value.data() + r * cols;
      const double * dy = c.out_grad.data() + r * cols;
      double dot = 0.0;
      for (std::size_t j = 0; j < cols; ++j) {
        dot += p[j] * dy[j];
      }
      for (std::size_t j = 0; j < cols; ++j) {
        (*gx)[r * cols + j] += p[j] * (dy[j] - dot);
      }
    }
  });
}

Var log_softmax(Var x)
{
  Graph & g = graph_of("log_softmax", {x});
  const Tensor & xv = x.value();
  const std::size_t cols = xv.cols();
  const std::size_t rows = xv.rows();
  Tensor y(xv.shape());
  for (std::size_t r = 0; r < rows; ++r) {
    const double * row = xv.data() + r * cols;
    const double mx = *std::max_element(row, row + cols);
    double z = 0.0;
    for (std::size_t j = 0; j < cols; ++j) {
      z += std::exp(row[j] - mx);
    }
    const double lse = mx + std::log(z);
    for (std::size_t j = 0; j < cols; ++j) {
      y[r * cols + j] = row[j] - lse;
    }
  }
  return g.record("log_softmax", std::move(y), {x}, [rows, cols](const BackwardContext & c) {
    Tensor * gx = c.in_grads[0];
    if (!gx) {
      return;
    }
    for (std::size_t r = 0; r < rows; ++r) {
      const double * ly = c.out_value.data() + r * cols;
      const double * dy = c.out_grad.data() + r * cols;
      double s = 0.0;
      for (std::size_t j = 0; j < cols; ++j) {
        s += dy[j];
      }
      for (std::size_t j = 0; j < cols; ++j) {
        (*gx)[r * cols + j] += dy[j] - std::exp(ly[j]) * s;
      }
    }
  });
}

Var masked_max_pool(Var x, const Mask & mask)
{
  Graph & g = graph_of("masked_max_pool", {x});
  const Tensor & xv = x.value();
  if (xv.rank() != 3 || mask.size() != xv.dim(0) * xv.dim(1)) {
    throw ShapeError(
      "masked_max_pool: input " + shape_str(xv.shape()) + " with mask of " +
      std::to_string(mask.size()) + " entries");
  }
  const std::size_t groups = xv.dim(0);
  const std::size_t len = xv.dim(1);
  const std::size_t cols = xv.dim(2);
  Tensor y({groups, cols});
  constexpr std::size_t none = static_cast<std::size_t>(-1);
  auto argmax = std::make_shared<std::vector<std::size_t>>(groups * cols, none);
  for (std::size_t gi = 0; gi < groups; ++gi) {
    for (std::size_t l = 0; l < len; ++l) {
      if (!mask[gi * len + l]) {
        continue;
      }
      const double * row = xv.data() + (gi * len + l) * cols;
      for (std::size_t j = 0; j < cols; ++j) {
        std::size_t & am = (*argmax)[gi * cols + j];
        if (am == none || row[j] > y[gi * cols + j]) {
          am = (gi * len + l) * cols + j;
          y[gi * cols + j] = row[j];
        }
      }
    }
  }
  return g.record("masked_max_pool", std::move(y), {x}, [argmax](const BackwardContext & c) {
    if (Tensor * gx = c.in_grads[0]) {
      for (std::size_t i = 0; i < argmax->size(); ++i) {
        if ((*argmax)[i] != none) {
          (*gx)[(*argmax)[i]] += c.out_grad[i];
        }
      }
    }
  });
}

Var sum(Var a)
{
  Graph & g = graph_of("sum", {a});
  double s = 0.0;
  for (double v : a.value().values()) {
    s += v;
  }
  return g.record("sum", Tensor::scalar(s), {a}, [](const BackwardContext & c) {
    if (Tensor * ga = c.in_grads[0]) {
      const double d = c.out_grad[0];
      for (std::size_t i = 0; i < ga->size(); ++i) {
        (*ga)[i] += d;
      }
    }
  });
}

Var mean(Var a)
{
  const std::size_t n = a.value().size();
  if (n == 0) {
    throw ShapeError("mean: empty operand " + shape_str(a.shape()));
  }
  return scale(sum(a), 1.0 / static_cast<double>(n));
}

Var dropout(Var a, double p)
{
  Graph & g = graph_of("dropout", {a});
  if (!g.training() || p <= 0.0) {
    return a;
  }
  if (p >= 1.0) {
    throw ConfigError("dropout: probability must be < 1");
  }
  std::bernoulli_distribution keep(1.0 - p);
  Tensor m(a.shape());
  const double s = 1.0 / (1.0 - p);
  for (std::size_t i = 0; i < m.size(); ++i) {
    m[i] = keep(g.rng()) ? s : 0.0;
  }
  return mul_const(a, m);
}

Var attention(Var q, Var k, Var v, const Mask & mask, std::size_t heads, Tensor * probs)
{
  Graph & g = graph_of("attention", {q, k, v});
  const Tensor & qv = q.value();
  const Tensor & kv = k.value();
  const Tensor & vv = v.value();
  if (qv.rank() != 2 || kv.rank() != 3 || kv.shape() != vv.shape() || kv.dim(0) != qv.dim(0) ||
      kv.dim(2) != qv.dim(1)) {
    throw ShapeError(
      "attention: query " + shape_str(qv.shape()) + ", key " + shape_str(kv.shape()) +
      ", value " + shape_str(vv.shape()));
  }
  const std::size_t nu = qv.dim(0);
  const std::size_t nv = kv.dim(1);
  const std::size_t nc = qv.dim(1);
  if (mask.size() != nu * nv) {
    throw ShapeError(
      "attention: mask of " + std::to_string(mask.size()) + " entries for " +
      std::to_string(nu) + " x " + std::to_string(nv) + " scores");
  }
  if (heads == 0 || nc % heads != 0) {
    throw ShapeError(
      "attention: " + std::to_string(nc) + " channels not divisible into " +
      std::to_string(heads) + " heads");
  }
  const std::size_t hd = nc / heads;
  const double sc = 1.0 / std::sqrt(static_cast<double>(hd));
  auto p = std::make_shared<Tensor>(Shape{heads, nu, nv});
  Tensor y({nu, nc});
  std::vector<double> s(nv);
  for (std::size_t u = 0; u < nu; ++u) {
    const double * qu = qv.data() + u * nc;
    for (std::size_t h = 0; h < heads; ++h) {
      double mx = -std::numeric_limits<double>::infinity();
      for (std::size_t j = 0; j < nv; ++j) {
        if (!mask[u * nv + j]) {
          continue;
        }
        const double * kj = kv.data() + (u * nv + j) * nc + h * hd;
        double dot = 0.0;
        for (std::size_t d = 0; d < hd; ++d) {
          dot += qu[h * hd + d] * kj[d];
        }
        s[j] = dot * sc;
        mx = std::max(mx, s[j]);
      }
      if (!std::isfinite(mx)) {
        continue;
      }
      double z = 0.0;
      double * pr = p->data() + (h * nu + u) * nv;
      for (std::size_t j = 0; j < nv; ++j) {
        if (mask[u * nv + j]) {
          pr[j] = std::exp(s[j] - mx);
          z += pr[j];
        }
      }
      double * yu = y.data() + u * nc + h * hd;
      for (std::size_t j = 0; j < nv; ++j) {
        if (!mask[u * nv + j]) {
          continue;
        }
        pr[j] /= z;
        const double * vj = vv.data() + (u * nv + j) * nc + h * hd;
        for (std::size_t d = 0; d < hd; ++d) {
          yu[d] += pr[j] * vj[d];
        }
      }
    }
  }
  if (probs) {
    *probs = *p;
  }
  return g.record(
    "attention", std::move(y), {q, k, v}, [p, nu, nv, nc, heads, hd, sc](const BackwardContext & c) {
      const Tensor & qv = *c.in_values[0];
      const Tensor & kv = *c.in_values[1];
      const Tensor & vv = *c.in_values[2];
      Tensor * gq = c.in_grads[0];
      Tensor * gk = c.in_grads[1];
      Tensor * gv = c.in_grads[2];
      std::vector<double> dp(nv);
      for (std::size_t u = 0; u < nu; ++u) {
        for (std::size_t h = 0; h < heads; ++h) {
          const double * pr = p->data() + (h * nu + u) * nv;
          const double * dy = c.out_grad.data() + u * nc + h * hd;
          double dot = 0.0;
          for (std::size_t j = 0; j < nv; ++j) {
            const double * vj = vv.data() + (u * nv + j) * nc + h * hd;
            double acc = 0.0;
            for (std::size_t d = 0; d < hd; ++d) {
              acc += dy[d] * vj[d];
            }
            dp[j] = acc;
            dot += pr[j] * acc;
            if (gv && pr[j] != 0.0) {
              double * gvj = gv->data() + (u * nv + j) * nc + h * hd;
              for (std::size_t d = 0; d < hd; ++d) {
                gvj[d] += pr[j] * dy[d];
              }
            }
          }
          const double * qu = qv.data() + u * nc + h * hd;
          for (std::size_t j = 0; j < nv; ++j) {
            const double ds = pr[j] * (dp[j] - dot) * sc;
            if (ds == 0.0) {
              continue;
            }
            if (gq) {
              const double * kj = kv.data() + (u * nv + j) * nc + h * hd;
              double * gqu = gq->data() + u * nc + h * hd;
              for (std::size_t d = 0; d < hd; ++d) {
                gqu[d] += ds * kj[d];
              }
            }
            if (gk) {
              double * gkj = gk->data() + (u * nv + j) * nc + h * hd;
              for (std::size_t d = 0; d < hd; ++d) {
                gkj[d] += ds * qu[d];
              }
            }
          }
        }
      }
    });
}

Var dense_attention(Var q, Var k, Var v, const Mask & mask, std::size_t heads)
{
  const Shape & qs = q.shape();
  const Shape & ks = k.shape();
  if (qs.size() != 2 || ks.size() != 2 || ks != v.shape() || ks[1] != qs[1]) {
    throw ShapeError(
      "dense_attention: query " + shape_str(qs) + ", key " + shape_str(ks) + ", value " + shape_str(v.shape()));
  }
  if (mask.size() != qs[0] * ks[0]) {
    throw ShapeError("dense_attention: mask size does not match " + std::to_string(qs[0]) + " x " +
                     std::to_string(ks[0]) + " scores");
  }
  if (heads == 0 || qs[1] % heads != 0) {
    throw ShapeError(
      "dense_attention: " + std::to_string(qs[1]) + " channels not divisible into " + std::to_string(heads) +
      " heads");
  }
  const std::size_t hd = qs[1] / heads;
  const double sc = 1.0 / std::sqrt(static_cast<double>(hd));
  std::vector<Var> outs;
  for (std::size_t h = 0; h < heads; ++h) {
    Var qh = heads == 1 ? q : slice(q, 1, h * hd, hd);
    Var kh = heads == 1 ? k : slice(k, 1, h * hd, hd);
    Var vh = heads == 1 ? v : slice(v, 1, h * hd, hd);
    Var p = softmax(scale(matmul(qh, transpose(kh)), sc), mask);
    outs.push_back(matmul(p, vh));
  }
  return heads == 1 ? outs.front() : concat(outs, 1);
}

}  // namespace polarcast::nc
