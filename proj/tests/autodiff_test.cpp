/*
 * Copyright 2026 The Signet Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include <gtest/gtest.h>

#include <cmath>
#include <functional>
#include <memory>

#include "signet/adam.hpp"
#include "signet/grad_check.hpp"
#include "signet/ops.hpp"
#include "signet/params.hpp"
#include "signet/random.hpp"

using namespace signet;

namespace {

using Fn = std::function<Var(Tape&, std::span<const Var>)>;

// Test-local central-difference oracle, independent of grad_check().
double fd_max_rel_error(const Fn& f, std::vector<Tensor> theta, double h = 1e-6) {
  Tape tape;
  std::vector<Var> vars;
  for (const auto& t : theta) vars.push_back(tape.variable(t));
  tape.backward(f(tape, vars));
  double worst = 0;
  for (std::size_t p = 0; p < theta.size(); ++p) {
    const Tensor g = tape.grad(vars[p]);
    for (std::size_t i = 0; i < theta[p].size(); ++i) {
      auto eval = [&](double x) {
        auto th = theta;
        th[p][i] = x;
        Tape t2;
        std::vector<Var> v2;
        for (const auto& t : th) v2.push_back(t2.constant(t));
        return f(t2, v2).value().item();
      };
      const double num = (eval(theta[p][i] + h) - eval(theta[p][i] - h)) / (2 * h);
      worst = std::max(worst, std::abs(num - g[i]) / std::max({std::abs(num), std::abs(g[i]), 1e-8}));
    }
  }
  return worst;
}

Tensor random_matrix(std::size_t r, std::size_t c, Rng& rng, double lo = -2, double hi = 2) {
  Tensor t = Tensor::matrix(r, c);
  for (double& v : t.values()) v = lo + (hi - lo) * uniform01(rng);
  return t;
}

}  // namespace

TEST(Matmul, IdentityAndExample) {
  Tape t;
  Rng rng(1);
  Tensor x = random_matrix(3, 2, rng);
  EXPECT_EQ(matmul(t.constant(Tensor::identity(3)), t.constant(x)).value(), x);
  Var y = matmul(t.constant(Tensor::from_rows({{1, 2}, {3, 4}})), t.constant(Tensor::from_rows({{1}, {1}})));
  EXPECT_EQ(y.value(), Tensor::from_rows({{3}, {7}}));
}

TEST(Matmul, ShapeErrorNamesShapes) {
  Tape t;
  try {
    matmul(t.constant(Tensor::matrix(2, 3)), t.constant(Tensor::matrix(2, 3)));
    FAIL();
  } catch (const ShapeError& e) {
    EXPECT_NE(std::string(e.what()).find("[2x3]"), std::string::npos) << e.what();
  }
}

TEST(Matmul, FiniteDifference) {
  Rng rng(2);
  Fn f = [](Tape&, std::span<const Var> v) { return sum(square(matmul(v[0], v[1]))); };
  EXPECT_LT(fd_max_rel_error(f, {random_matrix(3, 4, rng), random_matrix(4, 2, rng)}), 1e-6);
}

TEST(Hadamard, Values) {
  Tape t;
  Tensor a = Tensor::vector({1, 2, 3});
  EXPECT_EQ(hadamard(t.constant(a), t.constant(Tensor::vector({1, 1, 1}))).value(), a);
  EXPECT_EQ(hadamard(t.constant(a), t.constant(Tensor::vector({4, 5, 6}))).value(), Tensor::vector({4, 10, 18}));
}

TEST(Activations, Values) {
  Tape t;
  EXPECT_EQ(sigmoid(t.constant(Tensor::scalar(0))).value().item(), 0.5);
  EXPECT_EQ(relu(t.constant(Tensor::vector({-3, 3}))).value(), Tensor::vector({0, 3}));
  Var s = sigmoid(t.constant(Tensor::vector({40, -40})));
  EXPECT_NEAR(s.value()[0], 1.0, 1e-15);
  EXPECT_NEAR(s.value()[1], 0.0, 1e-15);
  EXPECT_GT(s.value()[1], 0.0);
}

TEST(Bce, Values) {
  Tape t;
  EXPECT_NEAR(bce(t.constant(Tensor::vector({0.5, 0.5})), {1, 0}).value().item(), std::log(2.0), 1e-15);
  EXPECT_LT(bce(t.constant(Tensor::vector({1, 0})), {1, 0}).value().item(), 1e-10);
  EXPECT_NEAR(bce_with_logits(t.constant(Tensor::vector({0, 0})), {1, 0}).value().item(), std::log(2.0), 1e-15);
  EXPECT_THROW(bce(t.constant(Tensor::vector({0.5})), {1, 0}), ShapeError);
}

TEST(Bce, FiniteDifference) {
  Rng rng(3);
  Fn probs = [](Tape&, std::span<const Var> v) { return bce(sigmoid(v[0]), {1, 0, 1, 1, 0}); };
  Fn logits = [](Tape&, std::span<const Var> v) { return bce_with_logits(v[0], {1, 0, 1, 1, 0}); };
  Tensor x = Tensor::vector({0.3, -1.2, 1.7, -0.4, 0.9});
  EXPECT_LT(fd_max_rel_error(probs, {x}), 1e-5);
  EXPECT_LT(fd_max_rel_error(logits, {x}), 1e-5);
}

// Every differentiable kernel in one composite, 50 random draws in [-2, 2].
TEST(Kernels, RandomCompositeFiniteDifference) {
  Rng rng(4);
  auto sp = std::make_shared<SparseRows>();
  sp->n_cols = 3;
  sp->push(1, 0.5);
  sp->push(2, 0.25);
  sp->end_row();
  sp->push(0, 1.0);
  sp->end_row();
  sp->end_row();
  Fn f = [sp](Tape& t, std::span<const Var> v) {
    Var h = matmul(v[0], v[1]);                                 // 3x2
    Var p = propagate(sp, tanh(h));                             // 3x2
    Var c = concat_cols({p, sigmoid(h)});                       // 3x4
    Var g = gather_rows(c, {2, 0, 0, 1});                       // 4x4
    Var m = hadamard(g, v[2]);                                  // row broadcast
    Var n = row_norm(add_scalar(m, 0.5));                       // 4
    Var w = mix({v[3], scale(v[3], 2.0)}, v[4], 1);             // 2x2
    Var q = sum_squares(matmul(h, w));
    Var r = row_sum(sub(add(c, c), square(c)));
    (void)t;
    return add(add(mean(n), q), add(sum(relu(r)), bce_with_logits(n, {1, 0, 1, 0})));
  };
  double worst = 0;
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<Tensor> theta{random_matrix(3, 3, rng), random_matrix(3, 2, rng), random_matrix(1, 4, rng),
                              random_matrix(2, 2, rng), random_matrix(2, 2, rng)};
    worst = std::max(worst, fd_max_rel_error(f, theta));
  }
  EXPECT_LT(worst, 1e-4);
}

TEST(Tape, NonFiniteValueAborts) {
  Tape t;
  Var x = t.constant(Tensor::vector({1e200}));
  EXPECT_THROW(square(square(x)), NumericError);
}

TEST(Tape, UnreachedGradIsZero) {
  Tape t;
  Var a = t.variable(Tensor::vector({1, 2}));
  Var b = t.variable(Tensor::vector({3, 4}));
  t.backward(sum(a));
  EXPECT_EQ(t.grad(a), Tensor::vector({1, 1}));
  EXPECT_EQ(t.grad(b), Tensor::vector({0, 0}));
}

TEST(Adam, ZeroGradientIsNoOp) {
  std::vector<Tensor> p{Tensor::vector({1, -2, 3})};
  std::vector<Tensor> g{Tensor::vector({0, 0, 0})};
  AdamState s;
  adam_step(p, g, s);
  EXPECT_EQ(p[0], Tensor::vector({1, -2, 3}));
}

TEST(Adam, FirstStepMovesByLearningRate) {
  std::vector<Tensor> p{Tensor::scalar(1.0)};
  std::vector<Tensor> g{Tensor::scalar(1.0)};
  AdamState s;
  s.options.learning_rate = 0.1;
  adam_step(p, g, s);
  EXPECT_NEAR(p[0].item(), 0.9, 1e-6);
}

TEST(Adam, ClipEqualsScaledGradient) {
  std::vector<Tensor> a{Tensor::vector({6, 8})}, b = a;
  AdamState sa, sb;
  sa.options.clip_norm = 1.0;
  adam_step(a, std::vector<Tensor>{Tensor::vector({6, 8})}, sa);
  adam_step(b, std::vector<Tensor>{Tensor::vector({0.6, 0.8})}, sb);
  for (std::size_t i = 0; i < 2; ++i) {
    EXPECT_NEAR(sa.m[0][i], sb.m[0][i], 1e-15);
    EXPECT_NEAR(a[0][i], b[0][i], 1e-15);
  }
}

TEST(Adam, NonFiniteGradientNamesParameter) {
  std::vector<Tensor> p{Tensor::scalar(1.0)};
  std::vector<Tensor> g{Tensor::scalar(NAN)};
  std::vector<std::string> names{"enc.w"};
  AdamState s;
  try {
    adam_step(p, g, s, names);
    FAIL();
  } catch (const NumericError& e) {
    EXPECT_NE(std::string(e.what()).find("enc.w"), std::string::npos);
  }
}

TEST(GradCheck, LinearAndQuadratic) {
  Rng rng(5);
  Tensor w = random_matrix(4, 1, rng);
  ScalarFn linear = [w](Tape& t, std::span<const Var> v) { return sum(matmul(v[0], t.constant(w))); };
  ScalarFn quad = [](Tape&, std::span<const Var> v) { return sum_squares(v[0]); };
  EXPECT_LT(grad_check(linear, {random_matrix(3, 4, rng)}).max_rel_error, 1e-9);
  EXPECT_LT(grad_check(quad, {random_matrix(3, 4, rng)}).max_rel_error, 1e-8);
}

TEST(ParamStore, DuplicateNameRejected) {
  ParamStore s;
  s.add("a", Tensor::scalar(1));
  EXPECT_THROW(s.add("a", Tensor::scalar(2)), std::exception);
  EXPECT_EQ(s.index("a"), 0u);
}
