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

#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <span>
#include <vector>

#include "signet/tensor.hpp"

namespace signet {

// Builds a scalar loss on `tape` from one Var per parameter tensor.
using ScalarFn = std::function<Var(Tape&, std::span<const Var>)>;

struct GradCheckReport {
  double max_rel_error = 0.0;
  std::size_t param = 0;
  std::size_t index = 0;
  double analytic = 0.0;
  double numeric = 0.0;
};

inline double relative_error(double a, double b) {
  return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-8});
}

// Tape gradients of `f` at `theta`.
inline std::vector<Tensor> tape_gradient(const ScalarFn& f, const std::vector<Tensor>& theta) {
  Tape tape;
  std::vector<Var> vars;
  for (const Tensor& t : theta) vars.push_back(tape.variable(t));
  Var loss = f(tape, vars);
  tape.backward(loss);
  std::vector<Tensor> grads;
  for (Var v : vars) grads.push_back(tape.grad(v));
  return grads;
}

inline double evaluate(const ScalarFn& f, const std::vector<Tensor>& theta) {
  Tape tape;
  std::vector<Var> vars;
  for (const Tensor& t : theta) vars.push_back(tape.constant(t));
  return f(tape, vars).value().item();
}

// Compares tape gradients with central differences
// (f(theta + h e_i) - f(theta - h e_i)) / 2h over every coordinate.
inline GradCheckReport grad_check(const ScalarFn& f, std::vector<Tensor> theta, double h = 1e-5) {
  const std::vector<Tensor> analytic = tape_gradient(f, theta);
  GradCheckReport report;
  for (std::size_t p = 0; p < theta.size(); ++p) {
    for (std::size_t i = 0; i < theta[p].size(); ++i) {
      const double orig = theta[p][i];
      theta[p][i] = orig + h;
      const double up = evaluate(f, theta);
      theta[p][i] = orig - h;
      const double down = evaluate(f, theta);
      theta[p][i] = orig;
      const double numeric = (up - down) / (2.0 * h);
      const double err = relative_error(analytic[p][i], numeric);
      if (err > report.max_rel_error) {
        report = {err, p, i, analytic[p][i], numeric};
      }
    }
  }
  return report;
}

}  // namespace signet
