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

#ifndef POLARCAST__NUMCORE__TENSOR_HPP_
#define POLARCAST__NUMCORE__TENSOR_HPP_

#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

namespace polarcast::nc
{

using Shape = std::vector<std::size_t>;

std::size_t shape_numel(const Shape & shape);
std::string shape_str(const Shape & shape);

/**
 * @brief Dense row-major array of doubles.
 *
 * Most primitives interpret a tensor as a matrix of `rows() x cols()` where
 * `cols()` is the last extent and `rows()` is the product of the others.
 */
class Tensor
{
public:
  Tensor() = default;
  explicit Tensor(Shape shape, double fill = 0.0);
  Tensor(Shape shape, std::vector<double> data);

  static Tensor scalar(double v) { return Tensor({}, std::vector<double>{v}); }
  static Tensor vector(std::vector<double> v);

  const Shape & shape() const { return shape_; }
  std::size_t rank() const { return shape_.size(); }
  std::size_t dim(std::size_t axis) const { return shape_.at(axis); }
  std::size_t size() const { return data_.size(); }
  std::size_t cols() const { return shape_.empty() ? 1 : shape_.back(); }
  std::size_t rows() const { return cols() == 0 ? 0 : size() / cols(); }

  double * data() { return data_.data(); }
  const double * data() const { return data_.data(); }
  std::span<double> values() { return data_; }
  std::span<const double> values() const { return data_; }
  std::vector<double> & storage() { return data_; }
  const std::vector<double> & storage() const { return data_; }

  double & operator[](std::size_t i) { return data_[i]; }
  double operator[](std::size_t i) const { return data_[i]; }
  double & at(std::size_t r, std::size_t c) { return data_[r * cols() + c]; }
  double at(std::size_t r, std::size_t c) const { return data_[r * cols() + c]; }
  double item() const;

  // Same data, new shape; element count must be preserved.
  Tensor reshaped(Shape shape) const;

  bool all_finite() const;
  void fill(double v);

  friend bool operator==(const Tensor & a, const Tensor & b)
  {
    return a.shape_ == b.shape_ && a.data_ == b.data_;
  }

private:
  Shape shape_;
  std::vector<double> data_;
};

double max_abs_diff(const Tensor & a, const Tensor & b);

}  // namespace polarcast::nc

#endif  // POLARCAST__NUMCORE__TENSOR_HPP_
