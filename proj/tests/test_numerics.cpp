/* Copyright 2026 The Trajcast Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <functional>
#include <numeric>
#include <vector>

#include "gradcheck.hpp"
#include "trajcast/core/ops.hpp"
#include "trajcast/core/rng.hpp"
#include "trajcast/core/tape.hpp"

using namespace trajcast;
using trajcast::testing::check_gradient;

namespace {

Array<double> make_random(const Shape& s, Rng& rng, double scale = 1.0) {
  Array<double> a(s);
  for (int64_t i = 0; i < a.size(); ++i) a[i] = rng.normal() * scale;
  return a;
}

// Runs a finite-difference check of `build` (graph from leaves to a scalar)
// against tape gradients, over all leaf elements.
using BuildFn = std::function<Var<double>(Tape<double>&,
                                          const std::vector<Var<double>>&)>;

void op_gradcheck(const std::vector<Array<double>>& inputs,
                  const BuildFn& build, double tol = 1e-6) {
  std::vector<double> flat;
  for (const auto& a : inputs)
    flat.insert(flat.end(), a.data().begin(), a.data().end());

  auto eval = [&](const std::vector<double>& x) {
    Tape<double> tape;
    std::vector<Var<double>> leaves;
    size_t off = 0;
    for (const auto& a : inputs) {
      std::vector<double> d(x.begin() + static_cast<long>(off),
                            x.begin() + static_cast<long>(off + a.data().size()));
      off += a.data().size();
      leaves.push_back(tape.leaf(Array<double>(a.shape(), std::move(d))));
    }
    return build(tape, leaves).value()[0];
  };

  Tape<double> tape;
  std::vector<Var<double>> leaves;
  for (const auto& a : inputs) leaves.push_back(tape.leaf(a));
  Var<double> loss = build(tape, leaves);
  tape.backward(loss);
  std::vector<double> analytic;
  for (const auto& v : leaves) {
    const auto& g = tape.grad(v);
    analytic.insert(analytic.end(), g.data().begin(), g.data().end());
  }

  auto res = check_gradient(eval, flat, analytic, Tolerances<double>::fd_step,
                            tol);
  INFO(res.detail);
  CHECK(res.ok);
}

}  // namespace

TEST_CASE("matmul identity and selector cases") {
  Tape<double> t;
  auto I = t.leaf(Array<double>({2, 2}, {1, 0, 0, 1}));
  auto m = t.leaf(Array<double>({2, 2}, {1, 2, 3, 4}));
  auto r = matmul(I, m);
  CHECK(r.value().data() == std::vector<double>({1, 2, 3, 4}));

  auto sel = t.leaf(Array<double>({2, 2}, {1, 0, 0, 0}));
  auto v = t.leaf(Array<double>({2, 1}, {5, 7}));
  auto r2 = matmul(sel, v);
  CHECK(r2.value().data() == std::vector<double>({5, 0}));
}

TEST_CASE("matmul matches triple-loop oracle") {
  Rng rng(11);
  Array<double> a = make_random({3, 4}, rng);
  Array<double> b = make_random({4, 2}, rng);
  Tape<double> t;
  auto r = matmul(t.leaf(a), t.leaf(b));
  // Independent naive oracle.
  for (int64_t i = 0; i < 3; ++i)
    for (int64_t j = 0; j < 2; ++j) {
      double acc = 0;
      for (int64_t k = 0; k < 4; ++k) acc += a.at(i, k) * b.at(k, j);
      CHECK(std::abs(r.value().at(i, j) - acc) < 1e-12);
    }
}

TEST_CASE("matmul shape mismatch names both shapes") {
  Tape<double> t;
  auto a = t.leaf(Array<double>({2, 3}));
  auto b = t.leaf(Array<double>({2, 2}));
  CHECK_THROWS_WITH_AS(matmul(a, b),
                       doctest::Contains("[2,3]"), ShapeError);
  try {
    matmul(a, b);
  } catch (const ShapeError& e) {
    CHECK(std::string(e.what()).find("[2,2]") != std::string::npos);
  }
}

TEST_CASE("softmax symmetry, saturation, masking") {
  Tape<double> t;
  auto x = t.leaf(Array<double>({3}, {0, 0, 0}));
  auto y = softmax_masked(x, nullptr);
  for (int i = 0; i < 3; ++i)
    CHECK(y.value()[i] == doctest::Approx(1.0 / 3.0).epsilon(1e-12));

  auto sat = softmax_masked(t.leaf(Array<double>({2}, {1000, 0})), nullptr);
  CHECK(std::abs(sat.value()[0] - 1.0) < 1e-12);
  CHECK(std::abs(sat.value()[1] - 0.0) < 1e-12);

  Mask m(Shape{3}, {1, 1, 0});
  auto masked = softmax_masked(t.leaf(Array<double>({3}, {1, 2, 3})), &m);
  // Scalar oracle: exp over the surviving two entries.
  const double e1 = std::exp(1.0), e2 = std::exp(2.0);
  CHECK(masked.value()[0] == doctest::Approx(e1 / (e1 + e2)).epsilon(1e-12));
  CHECK(masked.value()[1] == doctest::Approx(e2 / (e1 + e2)).epsilon(1e-12));
  CHECK(masked.value()[2] == 0.0);
}

TEST_CASE("softmax rows sum to one and masked entries are exactly zero") {
  Rng rng(5);
  for (int it = 0; it < 50; ++it) {
    Array<double> x = make_random({4, 6}, rng, 3.0);
    Mask m(Shape{4, 6});
    for (int64_t i = 0; i < m.size(); ++i) m[i] = rng.uniform() < 0.7;
    for (int64_t r = 0; r < 4; ++r) m.at(r, rng.uniform_int(6)) = 1;
    Tape<double> t;
    auto y = softmax_masked(t.leaf(x), &m);
    for (int64_t r = 0; r < 4; ++r) {
      double sum = 0;
      for (int64_t j = 0; j < 6; ++j) {
        if (!m.at(r, j)) CHECK(y.value().at(r, j) == 0.0);
        sum += y.value().at(r, j);
      }
      CHECK(std::abs(sum - 1.0) <= Tolerances<double>::softmax_sum);
    }
  }
}

TEST_CASE("softmax fully-masked row raises") {
  Tape<double> t;
  Mask m(Shape{1, 3});  // all invalid
  auto x = t.leaf(Array<double>({1, 3}, {1, 2, 3}));
  CHECK_THROWS_AS(softmax_masked(x, &m), NumericError);
}

TEST_CASE("layernorm closed-form cases") {
  Tape<double> t;
  auto gain1 = t.leaf(Array<double>({4}, {1, 1, 1, 1}));
  auto bias0 = t.leaf(Array<double>({4}));
  auto c = layernorm(t.leaf(Array<double>({4}, {5, 5, 5, 5})), gain1, bias0);
  for (int i = 0; i < 4; ++i) CHECK(std::abs(c.value()[i]) < 1e-6);

  auto g2 = t.leaf(Array<double>({2}, {1, 1}));
  auto b2 = t.leaf(Array<double>({2}));
  auto pm = layernorm(t.leaf(Array<double>({2}, {1, -1})), g2, b2);
  // mean 0, var 1 -> outputs +-1 up to the 1e-6 epsilon
  CHECK(pm.value()[0] == doctest::Approx(1.0).epsilon(1e-5));
  CHECK(pm.value()[1] == doctest::Approx(-1.0).epsilon(1e-5));

  auto g0 = t.leaf(Array<double>({2}, {0, 0}));
  auto bb = t.leaf(Array<double>({2}, {3, -2}));
  Rng rng(3);
  auto any = layernorm(t.leaf(make_random({5, 2}, rng)), g0, bb);
  for (int64_t r = 0; r < 5; ++r) {
    CHECK(any.value().at(r, 0) == 3.0);
    CHECK(any.value().at(r, 1) == -2.0);
  }
}

TEST_CASE("backward quadratic toy") {
  Tape<double> t;
  auto x = t.leaf(Array<double>({2}, {1, 2}));
  auto loss = sum_all(mul(x, x));
  t.backward(loss);
  CHECK(t.grad(x)[0] == doctest::Approx(2.0));
  CHECK(t.grad(x)[1] == doctest::Approx(4.0));
}

TEST_CASE("backward softmax cross-entropy at uniform logits") {
  const int k = 6;
  const int target = 2;
  Tape<double> t;
  auto logits = t.leaf(Array<double>({1, k}));
  auto logp = log_softmax(logits);
  auto picked = take_index1(logp, {target});
  auto loss = scale(sum_all(picked), -1.0);
  t.backward(loss);
  // Analytic oracle: p - onehot with p uniform.
  for (int j = 0; j < k; ++j) {
    const double expect = 1.0 / k - (j == target ? 1.0 : 0.0);
    CHECK(t.grad(logits)[j] == doctest::Approx(expect).epsilon(1e-12));
  }
}

TEST_CASE("backward errors: non-scalar loss and foreign parents") {
  Tape<double> t;
  auto x = t.leaf(Array<double>({2}, {1, 2}));
  CHECK_THROWS_AS(t.backward(x), ShapeError);

  CHECK_THROWS_AS(
      t.record("bogus", Array<double>({1}), {99}, nullptr), Error);
}

TEST_CASE("gradients of unused nodes are zero") {
  Tape<double> t;
  auto x = t.leaf(Array<double>({2}, {1, 2}));
  auto unused = t.leaf(Array<double>({3}, {5, 5, 5}));
  auto loss = sum_all(mul(x, x));
  t.backward(loss);
  for (int i = 0; i < 3; ++i) CHECK(t.grad(unused)[i] == 0.0);
}

TEST_CASE("finite-difference checks for every differentiable op") {
  Rng rng(42);

  op_gradcheck({make_random({3, 4}, rng), make_random({4, 2}, rng)},
               [](Tape<double>&, const std::vector<Var<double>>& v) {
                 return sum_all(matmul(v[0], v[1]));
               });

  op_gradcheck({make_random({2, 3, 4}, rng), make_random({2, 4, 2}, rng)},
               [](Tape<double>&, const std::vector<Var<double>>& v) {
                 return sum_all(mul(bmm(v[0], v[1]), bmm(v[0], v[1])));
               });

  op_gradcheck({make_random({3, 5}, rng), make_random({3, 5}, rng)},
               [](Tape<double>&, const std::vector<Var<double>>& v) {
                 return sum_all(mul(add(v[0], v[1]), sub(v[0], v[1])));
               });

  op_gradcheck({make_random({4, 3}, rng), make_random({3}, rng)},
               [](Tape<double>&, const std::vector<Var<double>>& v) {
                 return sum_all(mul(add_bias(v[0], v[1]),
                                    add_bias(v[0], v[1])));
               });

  op_gradcheck({make_random({2, 4}, rng), make_random({4}, rng)},
               [](Tape<double>&, const std::vector<Var<double>>& v) {
                 return sum_all(mul(add_broadcast0(v[0], v[1]),
                                    add_broadcast0(v[0], v[1])));
               });

  op_gradcheck({make_random({5}, rng)},
               [](Tape<double>&, const std::vector<Var<double>>& v) {
                 return sum_all(mul(broadcast0(v[0], 3), broadcast0(v[0], 3)));
               });

  // relu away from the kink
  {
    Array<double> x({6}, {-2.0, -0.5, 0.4, 1.0, 2.5, -1.2});
    op_gradcheck({x}, [](Tape<double>&, const std::vector<Var<double>>& v) {
      return sum_all(mul(relu(v[0]), relu(v[0])));
    });
  }

  op_gradcheck({make_random({2, 5}, rng, 0.5)},
               [](Tape<double>&, const std::vector<Var<double>>& v) {
                 return sum_all(vexp(v[0]));
               });

  // clamp away from the boundaries
  {
    Array<double> x({4}, {-8.0, -0.3, 0.7, 9.0});
    op_gradcheck({x}, [](Tape<double>&, const std::vector<Var<double>>& v) {
      return sum_all(mul(clamp(v[0], -5, 5), clamp(v[0], -5, 5)));
    });
  }

  op_gradcheck({make_random({3, 4}, rng)},
               [](Tape<double>&, const std::vector<Var<double>>& v) {
                 auto y = softmax_masked(v[0], nullptr);
                 return sum_all(mul(y, y));
               });

  {
    Mask m(Shape{2, 4}, {1, 0, 1, 1, 1, 1, 0, 1});
    op_gradcheck({make_random({2, 4}, rng)},
                 [&m](Tape<double>&, const std::vector<Var<double>>& v) {
                   auto y = softmax_masked(v[0], &m);
                   return sum_all(mul(y, y));
                 });
  }

  op_gradcheck({make_random({2, 5}, rng)},
               [](Tape<double>&, const std::vector<Var<double>>& v) {
                 auto y = log_softmax(v[0]);
                 return sum_all(mul(y, y));
               });

  op_gradcheck(
      {make_random({3, 4}, rng), make_random({4}, rng), make_random({4}, rng)},
      [](Tape<double>&, const std::vector<Var<double>>& v) {
        auto y = layernorm(v[0], v[1], v[2]);
        return sum_all(mul(y, y));
      });

  op_gradcheck({make_random({2, 3, 4}, rng)},
               [](Tape<double>&, const std::vector<Var<double>>& v) {
                 auto y = transpose(v[0], {1, 0, 2});
                 return sum_all(mul(y, y));
               });

  op_gradcheck({make_random({2, 6}, rng)},
               [](Tape<double>&, const std::vector<Var<double>>& v) {
                 auto y = reshape(v[0], {3, 4});
                 return sum_all(mul(y, y));
               });

  op_gradcheck({make_random({2, 3}, rng), make_random({2, 2}, rng)},
               [](Tape<double>&, const std::vector<Var<double>>& v) {
                 auto y = concat<double>({v[0], v[1]}, 1);
                 return sum_all(mul(y, y));
               });

  op_gradcheck({make_random({2, 5}, rng)},
               [](Tape<double>&, const std::vector<Var<double>>& v) {
                 auto y = slice(v[0], 1, 1, 3);
                 return sum_all(mul(y, y));
               });

  op_gradcheck({make_random({3, 4}, rng)},
               [](Tape<double>&, const std::vector<Var<double>>& v) {
                 auto y = sum_trailing(v[0]);
                 return sum_all(mul(y, y));
               });

  op_gradcheck({make_random({4, 3}, rng)},
               [](Tape<double>&, const std::vector<Var<double>>& v) {
                 return mean_all(mul(v[0], v[0]));
               });

  {
    Mask m(Shape{2, 3, 2});
    Rng mr(9);
    for (int64_t i = 0; i < m.size(); ++i) m[i] = mr.uniform() < 0.8;
    m.at(0, 0, 0) = 1;
    m.at(1, 0, 1) = 1;
    op_gradcheck({make_random({2, 3, 2, 4}, rng)},
                 [&m](Tape<double>&, const std::vector<Var<double>>& v) {
                   auto y = masked_mean_axis1(v[0], m);
                   return sum_all(mul(y, y));
                 });
  }

  op_gradcheck({make_random({3, 4, 2}, rng)},
               [](Tape<double>&, const std::vector<Var<double>>& v) {
                 auto y = take_index1(v[0], {2, 0, 3});
                 return sum_all(mul(y, y));
               });
}

TEST_CASE("forward determinism: identical inputs give bit-identical results") {
  auto run = [] {
    Rng rng(77);
    Array<double> a = make_random({6, 6}, rng);
    Array<double> b = make_random({6, 6}, rng);
    Tape<double> t;
    auto y = softmax_masked(matmul(t.leaf(a), t.leaf(b)), nullptr);
    return y.value().data();
  };
  CHECK(run() == run());
}

TEST_CASE("non-finite forward value is reported with the producing op") {
  Tape<double> t;
  auto x = t.leaf(Array<double>({2}, {800.0, 0.0}));
  CHECK_THROWS_WITH_AS(vexp(x), doctest::Contains("exp"), NumericError);
}
