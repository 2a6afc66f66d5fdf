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

#ifndef POLARCAST__NUMCORE__OPS_HPP_
#define POLARCAST__NUMCORE__OPS_HPP_

#include <cstdint>
#include <vector>

#include "polarcast/numcore/graph.hpp"

// Differentiable primitives. Every primitive validates shapes and throws
// ShapeError naming itself and the offending shapes. "Row" means a slice along
// the last axis: a tensor of shape [a x b x c] has a*b rows of c columns.

namespace polarcast::nc
{

using Mask = std::vector<std::uint8_t>;

// Elementwise, identical shapes.
Var add(Var a, Var b);
Var sub(Var a, Var b);
Var mul(Var a, Var b);

// a + b where b has shape [cols(a)], added to every row.
Var add_row(Var a, Var b);
// a [U x V x C] + b [V x C], b broadcast over the leading axis.
Var add_broadcast(Var a, Var b);
// a * m for a constant m of the same shape.
Var mul_const(Var a, const Tensor & m);
// a * s[row] for a constant per-row scale of length rows(a).
Var scale_rows(Var a, const std::vector<double> & s);
Var scale(Var a, double s);
Var add_scalar(Var a, double s);
Var neg(Var a);

// [... x k] * [k x n] -> [... x n]
Var matmul(Var a, Var b);
// x [... x in] * w [in x out] + bias [out]; `bias` may be an invalid Var.
Var linear(Var x, Var w, Var bias);
Var transpose(Var a);
Var reshape(Var a, Shape shape);
// Stop-gradient copy.
Var detach(Var a);

Var concat(const std::vector<Var> & parts, std::size_t axis);
Var slice(Var a, std::size_t axis, std::size_t start, std::size_t length);
// Select entries along axis 0; indices may repeat.
Var gather(Var a, const std::vector<std::size_t> & index);

Var gelu(Var a);
Var relu(Var a);
Var sigmoid(Var a);
Var tanh(Var a);
Var softplus(Var a);
Var exp(Var a);
Var log(Var a);
Var sin(Var a);
Var cos(Var a);
// sqrt(a + eps) with eps >= 0.
Var sqrt(Var a, double eps = 0.0);
Var square(Var a);
// Elementwise atan2(y, x); eps is added to x^2 + y^2 in the derivative.
Var atan2(Var y, Var x, double eps = 1e-12);
// Wrap to (-pi, pi]; derivative 1 almost everywhere.
Var wrap_angle(Var a);
// Huber-style smooth L1 with transition beta.
Var smooth_l1(Var a, double beta = 1.0);

// Normalizes each row, then applies gain [C] and bias [C].
Var layer_norm(Var x, Var gain, Var bias, double eps = 1e-5);

// Softmax along the last axis. With a mask (one flag per element), masked
// entries get probability exactly 0; a fully masked row yields all zeros.
Var softmax(Var x, const Mask & mask = {});
Var log_softmax(Var x);

// x [G x L x C], mask [G x L] -> [G x C]; groups without valid points give 0.
Var masked_max_pool(Var x, const Mask & mask);

Var sum(Var a);
Var mean(Var a);

// Inverted dropout; identity unless the record is in training mode.
Var dropout(Var a, double p);

/**
 * @brief Scaled dot-product attention with per-query key sets.
 *
 * q [U x C], k [U x V x C], v [U x V x C], mask [U x V] (1 = attend).
 * Channels are split evenly into `heads`; scores are scaled by 1/sqrt(C/heads).
 * Rows whose keys are all masked produce zeros. If `probs` is non-null it
 * receives the attention weights as [heads x U x V].
 */
Var attention(Var q, Var k, Var v, const Mask & mask, std::size_t heads, Tensor * probs = nullptr);

// Attention with one key set shared by all queries: q [U x C], k and v
// [V x C], mask [U x V]. Same scaling and masking rules as `attention`.
Var dense_attention(Var q, Var k, Var v, const Mask & mask, std::size_t heads);

}  // namespace polarcast::nc

#endif  // POLARCAST__NUMCORE__OPS_HPP_
