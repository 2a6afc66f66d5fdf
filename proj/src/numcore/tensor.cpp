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

#include "polarcast/numcore/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "polarcast/error.hpp"

namespace polarcast::nc
{

std::size_t shape_numel(const Shape & shape)
{
  std::size_t n = 1;
  for (auto d : shape) {
    n *= d;
  }
  return n;
}

std::string shape_str(const Shape & shape)
{
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) {
      os << " x ";
    }
    os << shape[i];
  }
  os << ']';
  return os.str();
}

Tensor::Tensor(Shape shape, double fill)
: shape_(std::move(shape)), data_(shape_numel(shape_), fill)
{
}

Tensor::Tensor(Shape shape, std::vector<double> data) : shape_(std::move(shape)), data_(std::move(data))
{
  if (shape_numel(shape_) != data_.size()) {
    throw ShapeError(
      "tensor: shape " + shape_str(shape_) + " needs " + std::to_string(shape_numel(shape_)) +
      " values, got " + std::to_string(data_.size()));
  }
}

Tensor Tensor::vector(std::vector<double> v)
{
  const std::size_t n = v.size();
  return Tensor({n}, std::move(v));
}

double Tensor::item() const
{
  if (data_.size() != 1) {
    throw ShapeError("item: tensor of shape " + shape_str(shape_) + " is not a scalar");
  }
  return data_[0];
}

Tensor Tensor::reshaped(Shape shape) const
{
  if (shape_numel(shape) != data_.size()) {
    throw ShapeError("reshape: cannot view " + shape_str(shape_) + " as " + shape_str(shape));
  }
  return Tensor(std::move(shape), data_);
}

bool Tensor::all_finite() const
{
  return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
}

void Tensor::fill(double v) { std::fill(data_.begin(), data_.end(), v); }

double max_abs_diff(const Tensor & a, const Tensor & b)
{
  if (a.shape() != b.shape()) {
    throw ShapeError("max_abs_diff: " + shape_str(a.shape()) + " vs " + shape_str(b.shape()));
  }
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    m = std::max(m, std::abs(a[i] - b[i]));
  }
  return m;
}

}  // namespace polarcast::nc
