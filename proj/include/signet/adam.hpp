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

#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "signet/error.hpp"
#include "signet/tensor.hpp"

namespace signet {

struct AdamOptions {
  double learning_rate = 1e-2;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  // Coupled L2: adds the gradient of weight_decay * ||theta||^2.
  double weight_decay = 0.0;
  // Global gradient-norm cap; <= 0 disables clipping.
  double clip_norm = 0.0;
};

struct AdamState {
  AdamOptions options;
  std::vector<Tensor> m;
  std::vector<Tensor> v;
  std::uint64_t step = 0;

  friend bool operator==(const AdamState&, const AdamState&) = default;
};

inline double global_norm(std::span<const Tensor> grads) {
  double s = 0;
  for (const Tensor& g : grads) s += g.squared_norm();
  return std::sqrt(s);
}

// One bias-corrected Adam update. `names` (optional) labels parameters in
// numeric-health errors.
inline void adam_step(std::span<Tensor> params, std::span<const Tensor> grads, AdamState& state,
                      std::span<const std::string> names = {}) {
  if (params.size() != grads.size()) throw ShapeError("adam_step: parameter/gradient count mismatch");
  for (std::size_t i = 0; i < params.size(); ++i) {
    grads[i].require_same_shape(params[i], "adam_step");
    if (!grads[i].all_finite()) {
      std::string label = i < names.size() ? names[i] : "#" + std::to_string(i);
      throw NumericError("non-finite gradient for parameter '" + label + "'");
    }
  }
  if (state.m.empty()) {
    for (const Tensor& p : params) {
      state.m.emplace_back(p.shape());
      state.v.emplace_back(p.shape());
    }
  }
  if (state.m.size() != params.size()) throw ShapeError("adam_step: optimizer state does not match parameters");

  const AdamOptions& o = state.options;
  std::vector<Tensor> eff(grads.begin(), grads.end());
  if (o.weight_decay > 0) {
    for (std::size_t i = 0; i < params.size(); ++i)
      for (std::size_t k = 0; k < eff[i].size(); ++k) eff[i][k] += 2.0 * o.weight_decay * params[i][k];
  }
  if (o.clip_norm > 0) {
    const double norm = global_norm(eff);
    if (norm > o.clip_norm) {
      for (Tensor& g : eff) g *= o.clip_norm / norm;
    }
  }

  ++state.step;
  const double t = static_cast<double>(state.step);
  const double c1 = 1.0 - std::pow(o.beta1, t);
  const double c2 = 1.0 - std::pow(o.beta2, t);
  for (std::size_t i = 0; i < params.size(); ++i) {
    Tensor& m = state.m[i];
    Tensor& v = state.v[i];
    for (std::size_t k = 0; k < params[i].size(); ++k) {
      const double g = eff[i][k];
      m[k] = o.beta1 * m[k] + (1.0 - o.beta1) * g;
      v[k] = o.beta2 * v[k] + (1.0 - o.beta2) * g * g;
      params[i][k] -= o.learning_rate * (m[k] / c1) / (std::sqrt(v[k] / c2) + o.epsilon);
    }
  }
}

}  // namespace signet
