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
#include <span>
#include <string>
#include <vector>

#include "signet/error.hpp"
#include "signet/random.hpp"
#include "signet/tensor.hpp"

namespace signet {

// Ordered, named registry of learnable tensors.
class ParamStore {
 public:
  std::size_t add(std::string name, Tensor value) {
    for (const auto& n : names_) {
      if (n == name) throw ConfigError("duplicate parameter '" + name + "'");
    }
    names_.push_back(std::move(name));
    values_.push_back(std::move(value));
    return values_.size() - 1;
  }

  std::size_t size() const { return values_.size(); }
  const std::vector<std::string>& names() const { return names_; }
  std::vector<Tensor>& values() { return values_; }
  const std::vector<Tensor>& values() const { return values_; }
  Tensor& operator[](std::size_t i) { return values_[i]; }
  const Tensor& operator[](std::size_t i) const { return values_[i]; }

  std::size_t index(const std::string& name) const {
    for (std::size_t i = 0; i < names_.size(); ++i) {
      if (names_[i] == name) return i;
    }
    throw ConfigError("no parameter named '" + name + "'");
  }

  // Registers every parameter as a differentiable leaf on `tape`.
  std::vector<Var> bind(Tape& tape) const {
    std::vector<Var> vars;
    vars.reserve(values_.size());
    for (const Tensor& t : values_) vars.push_back(tape.variable(t));
    return vars;
  }

  std::size_t num_scalars() const {
    std::size_t n = 0;
    for (const Tensor& t : values_) n += t.size();
    return n;
  }

  friend bool operator==(const ParamStore&, const ParamStore&) = default;

 private:
  std::vector<std::string> names_;
  std::vector<Tensor> values_;
};

// Uniform Glorot initialisation for a fan_in x fan_out matrix.
inline Tensor glorot(std::size_t fan_in, std::size_t fan_out, Rng& rng) {
  const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  Tensor t = Tensor::matrix(fan_in, fan_out);
  for (double& v : t.values()) v = (2.0 * uniform01(rng) - 1.0) * limit;
  return t;
}

inline Tensor uniform_tensor(Shape shape, double limit, Rng& rng) {
  Tensor t(std::move(shape));
  for (double& v : t.values()) v = (2.0 * uniform01(rng) - 1.0) * limit;
  return t;
}

}  // namespace signet
