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

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <random>

#include "polarcast/numcore/gradcheck.hpp"
#include "polarcast/numcore/ops.hpp"

namespace polarcast::nc
{

namespace
{

using Op = std::function<Var(std::vector<Var> &)>;

class Suite
{
public:
  explicit Suite(std::uint64_t seed) : rng_(seed), seed_(seed) {}

  Tensor random(Shape shape, double lo = -2.0, double hi = 2.0)
  {
    Tensor t(std::move(shape));
    std::uniform_real_distribution<double> d(lo, hi);
    for (auto & v : t.values()) {
      v = d(rng_);
    }
    return t;
  }

  // Moves every entry at least `gap` away from each kink.
  static void avoid_kinks(Tensor & t, const std::vector<double> & kinks, double gap)
  {
    for (auto & v : t.values()) {
      for (double k : kinks) {
        if (std::abs(v - k) < gap) {
          v = k + (v >= k ? gap : -gap) * 2.0;
        }
      }
    }
  }

  void run(const std::string & name, const std::vector<Tensor> & inputs, const Op & op)
  {
    ParameterStore store;
    std::vector<Parameter *> ps;
    for (std::size_t i = 0; i < inputs.size(); ++i) {
      ps.push_back(&store.create("in" + std::to_string(i), inputs[i]));
    }
    Tensor w;
    auto loss = [&](bool with_backward) {
      Graph g;
      std::vector<Var> vars;
      for (auto * p : ps) {
        vars.push_back(g.param(*p));
      }
      Var out = op(vars);
      if (w.size() != out.value().size()) {
        w = random(out.shape(), -1.0, 1.0);
      }
      Var l = sum(mul_const(out, w));
      if (with_backward) {
        g.backward(l);
      }
      return l.value().item();
    };
    constexpr double kStep = 1e-4;
    const double floor =
      1e7 * std::numeric_limits<double>::epsilon() * std::max(std::abs(loss(false)), 1.0) / kStep;
    const auto r = check_gradients(store, loss, 1000, seed_, kStep, floor, Stencil::kFourthOrder);
    results.push_back(
      {name, r.max_rel_err, r.worst, r.worst_analytic, r.worst_numeric, r.floor, r.max_abs_err_below_floor});
  }

  std::vector<PrimitiveCheck> results;

private:
  std::mt19937_64 rng_;
  std::uint64_t seed_;
};

}  // namespace

std::vector<PrimitiveCheck> check_primitives(std::uint64_t seed)
{
  constexpr double kPi = std::numbers::pi;
  Suite s(seed);

  auto a = s.random({3, 4});
  auto b = s.random({3, 4});
  s.run("add", {a, b}, [](auto & v) { return add(v[0], v[1]); });
  s.run("sub", {a, b}, [](auto & v) { return sub(v[0], v[1]); });
  s.run("mul", {a, b}, [](auto & v) { return mul(v[0], v[1]); });
  s.run("atan2", {a, b}, [](auto & v) { return atan2(v[0], v[1]); });
  s.run("add_row", {a, s.random({4})}, [](auto & v) { return add_row(v[0], v[1]); });
  s.run("add_broadcast", {s.random({2, 3, 4}), s.random({3, 4})}, [](auto & v) { return add_broadcast(v[0], v[1]); });
  s.run("scale_rows", {a}, [](auto & v) { return scale_rows(v[0], {0.5, -2.0, 0.0}); });

  auto x = s.random({2, 3, 4});
  auto w = s.random({4, 5});
  s.run("matmul", {x, w}, [](auto & v) { return matmul(v[0], v[1]); });
  s.run("linear", {x, w, s.random({5})}, [](auto & v) { return linear(v[0], v[1], v[2]); });
  s.run("transpose", {s.random({3, 5})}, [](auto & v) { return transpose(v[0]); });

  auto u = s.random({4, 3});
  auto pos = s.random({4, 3}, 0.1, 3.0);
  s.run("gelu", {u}, [](auto & v) { return gelu(v[0]); });
  s.run("sigmoid", {u}, [](auto & v) { return sigmoid(v[0]); });
  s.run("tanh", {u}, [](auto & v) { return tanh(v[0]); });
  s.run("softplus", {u}, [](auto & v) { return softplus(v[0]); });
  s.run("exp", {u}, [](auto & v) { return exp(v[0]); });
  s.run("log", {pos}, [](auto & v) { return log(v[0]); });
  s.run("sin", {u}, [](auto & v) { return sin(v[0]); });
  s.run("cos", {u}, [](auto & v) { return cos(v[0]); });
  s.run("sqrt", {pos}, [](auto & v) { return sqrt(v[0]); });
  s.run("square", {u}, [](auto & v) { return square(v[0]); });
  s.run("neg_scale", {u}, [](auto & v) { return scale(neg(v[0]), 3.0); });

  auto r = s.random({5, 4}, -3.0, 3.0);
  Suite::avoid_kinks(r, {0.0}, 1e-3);
  s.run("relu", {r}, [](auto & v) { return relu(v[0]); });
  auto sl = s.random({5, 4}, -3.0, 3.0);
  Suite::avoid_kinks(sl, {-1.0, 1.0}, 1e-3);
  s.run("smooth_l1", {sl}, [](auto & v) { return smooth_l1(v[0]); });
  auto ang = s.random({5, 4}, -9.0, 9.0);
  Suite::avoid_kinks(ang, {-3 * kPi, -kPi, kPi, 3 * kPi}, 1e-3);
  s.run("wrap_angle", {ang}, [](auto & v) { return wrap_angle(v[0]); });

  auto ln = s.random({4, 6});
  s.run("layer_norm", {ln, s.random({6}), s.random({6})}, [](auto & v) { return layer_norm(v[0], v[1], v[2]); });
  s.run("softmax", {ln}, [](auto & v) { return softmax(v[0]); });
  const Mask sm{1, 1, 0, 1, 0, 1, 1, 1, 1, 1, 1, 1, 0, 0, 0, 0, 0, 0, 1, 0, 0, 0, 0, 1};
  s.run("softmax_masked", {ln}, [sm](auto & v) { return softmax(v[0], sm); });
  s.run("log_softmax", {ln}, [](auto & v) { return log_softmax(v[0]); });

  auto t = s.random({2, 3, 4});
  s.run("concat_axis2", {t, s.random({2, 3, 2})}, [](auto & v) { return concat({v[0], v[1]}, 2); });
  s.run("concat_axis1", {t, s.random({2, 1, 4})}, [](auto & v) { return concat({v[0], v[1]}, 1); });
  s.run("slice", {t}, [](auto & v) { return slice(v[0], 1, 1, 2); });
  s.run("gather", {t}, [](auto & v) { return gather(v[0], {1, 0, 1}); });
  s.run("reshape", {t}, [](auto & v) { return reshape(v[0], {6, 4}); });
  s.run("mean", {t}, [](auto & v) { return mean(v[0]); });

  const Mask pm{1, 0, 1, 1, 0, 0, 0, 0, 1, 1, 1, 1};
  s.run("masked_max_pool", {s.random({3, 4, 5})}, [pm](auto & v) { return masked_max_pool(v[0], pm); });

  auto q = s.random({3, 4});
  auto k = s.random({3, 5, 4});
  auto val = s.random({3, 5, 4});
  Mask am(15, 1);
  am[2] = 0;
  am[5] = am[6] = am[7] = am[8] = am[9] = 0;
  for (std::size_t heads : {1u, 2u}) {
    s.run("attention_h" + std::to_string(heads), {q, k, val}, [am, heads](auto & v) {
      return attention(v[0], v[1], v[2], am, heads);
    });
  }
  return s.results;
}

}  // namespace polarcast::nc
