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
#include <functional>
#include <initializer_list>
#include <numeric>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "signet/error.hpp"

namespace signet {

using Shape = std::vector<std::size_t>;

inline std::string shape_string(const Shape& s) {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < s.size(); ++i) os << (i ? "x" : "") << s[i];
  os << ']';
  return os.str();
}

inline std::size_t shape_size(const Shape& s) {
  return std::accumulate(s.begin(), s.end(), std::size_t{1}, std::multiplies<>());
}

// Dense row-major array of doubles with rank 0, 1 or 2.
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(Shape shape, double fill = 0.0)
      : shape_(std::move(shape)), data_(shape_size(shape_), fill) {
    check_rank();
  }
  Tensor(Shape shape, std::vector<double> values) : shape_(std::move(shape)), data_(std::move(values)) {
    check_rank();
    if (data_.size() != shape_size(shape_)) {
      throw ShapeError("value count " + std::to_string(data_.size()) + " does not match shape " +
                       shape_string(shape_));
    }
  }

  static Tensor scalar(double v) { return Tensor(Shape{}, std::vector<double>{v}); }
  static Tensor vector(std::vector<double> v) {
    Shape s{v.size()};
    return Tensor(std::move(s), std::move(v));
  }
  static Tensor matrix(std::size_t rows, std::size_t cols, double fill = 0.0) {
    return Tensor(Shape{rows, cols}, fill);
  }
  static Tensor from_rows(std::initializer_list<std::initializer_list<double>> rows) {
    std::size_t r = rows.size();
    std::size_t c = r ? rows.begin()->size() : 0;
    std::vector<double> v;
    v.reserve(r * c);
    for (const auto& row : rows) {
      if (row.size() != c) throw ShapeError("ragged matrix literal");
      v.insert(v.end(), row.begin(), row.end());
    }
    return Tensor(Shape{r, c}, std::move(v));
  }
  static Tensor identity(std::size_t n) {
    Tensor t = matrix(n, n);
    for (std::size_t i = 0; i < n; ++i) t.at(i, i) = 1.0;
    return t;
  }

  const Shape& shape() const { return shape_; }
  std::size_t rank() const { return shape_.size(); }
  std::size_t size() const { return data_.size(); }
  std::size_t rows() const { return rank() == 2 ? shape_[0] : 1; }
  std::size_t cols() const { return rank() == 0 ? 1 : shape_.back(); }

  std::span<double> data() { return data_; }
  std::span<const double> data() const { return data_; }
  std::vector<double>& values() { return data_; }
  const std::vector<double>& values() const { return data_; }

  double& operator[](std::size_t i) { return data_[i]; }
  double operator[](std::size_t i) const { return data_[i]; }
  double& at(std::size_t r, std::size_t c) { return data_[r * cols() + c]; }
  double at(std::size_t r, std::size_t c) const { return data_[r * cols() + c]; }
  double item() const {
    if (size() != 1) throw ShapeError("item() on tensor of shape " + shape_string(shape_));
    return data_[0];
  }

  std::span<double> row(std::size_t r) { return {data_.data() + r * cols(), cols()}; }
  std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols(), cols()}; }

  bool all_finite() const {
    for (double v : data_) {
      if (!std::isfinite(v)) return false;
    }
    return true;
  }

  double squared_norm() const {
    double s = 0;
    for (double v : data_) s += v * v;
    return s;
  }

  void fill(double v) { std::fill(data_.begin(), data_.end(), v); }

  Tensor& operator+=(const Tensor& o) {
    require_same_shape(o, "+=");
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += o.data_[i];
    return *this;
  }
  Tensor& operator*=(double s) {
    for (double& v : data_) v *= s;
    return *this;
  }

  void require_same_shape(const Tensor& o, std::string_view op) const {
    if (shape_ != o.shape_) {
      throw ShapeError(std::string(op) + ": shape mismatch " + shape_string(shape_) + " vs " +
                       shape_string(o.shape_));
    }
  }

  friend bool operator==(const Tensor&, const Tensor&) = default;

 private:
  void check_rank() const {
    if (shape_.size() > 2) throw ShapeError("rank > 2 is not supported: " + shape_string(shape_));
  }

  Shape shape_;
  std::vector<double> data_;
};

class Tape;

// Handle to a value recorded on a Tape.
struct Var {
  Tape* tape = nullptr;
  std::uint32_t id = 0;

  const Tensor& value() const;
  const Shape& shape() const { return value().shape(); }
};

// Linear record of operations for reverse-mode differentiation.
//
// Nodes are appended after their inputs, so reverse insertion order is a
// valid reverse topological order. Intermediate gradients are released as
// soon as their backward rule has run; only variable (leaf) gradients remain.
class Tape {
 public:
  using Backward = std::function<void(Tape&, const Tensor& out_grad)>;

  Var constant(Tensor value) { return push(std::move(value), false, true, {}, "constant"); }
  Var variable(Tensor value) { return push(std::move(value), true, true, {}, "variable"); }

  // Records an op result. `backward` is kept only if an input requires grad.
  Var record(Tensor value, std::initializer_list<Var> inputs, std::string_view op, Backward backward) {
    bool needs = false;
    for (Var v : inputs) needs = needs || requires_grad(v);
    return push(std::move(value), needs, false, needs ? std::move(backward) : Backward{}, op);
  }
  Var record(Tensor value, std::span<const Var> inputs, std::string_view op, Backward backward) {
    bool needs = false;
    for (Var v : inputs) needs = needs || requires_grad(v);
    return push(std::move(value), needs, false, needs ? std::move(backward) : Backward{}, op);
  }

  const Tensor& value(Var v) const { return nodes_[v.id].value; }
  bool requires_grad(Var v) const { return nodes_[v.id].requires_grad; }
  std::size_t size() const { return nodes_.size(); }

  // Adds `g` into v's gradient; no-op for values that do not require grad.
  void accumulate(Var v, const Tensor& g) {
    if (Tensor* buf = grad_buffer(v)) *buf += g;
  }
  // Mutable gradient buffer, zero-initialised on first touch. Returns null
  // when v does not require grad.
  Tensor* grad_buffer(Var v) {
    Node& n = nodes_[v.id];
    if (!n.requires_grad) return nullptr;
    if (!n.has_grad) {
      n.grad = Tensor(n.value.shape());
      n.has_grad = true;
    }
    return &n.grad;
  }

  void backward(Var root) {
    if (value(root).size() != 1) {
      throw ShapeError("backward() needs a scalar root, got " + shape_string(value(root).shape()));
    }
    if (!requires_grad(root)) return;
    *grad_buffer(root) = Tensor(value(root).shape(), 1.0);
    for (std::size_t i = root.id + 1; i-- > 0;) {
      Node& n = nodes_[i];
      if (!n.requires_grad || n.leaf || !n.has_grad) continue;
      Tensor g = std::move(n.grad);
      n.grad = Tensor();
      n.has_grad = false;
      if (!g.all_finite()) throw NumericError("non-finite gradient flowing into '" + n.op + "'");
      n.backward(*this, g);
    }
  }

  // Gradient of a variable after backward(); zeros if it was never reached.
  Tensor grad(Var v) const {
    const Node& n = nodes_[v.id];
    if (n.has_grad) return n.grad;
    return Tensor(n.value.shape());
  }

 private:
  struct Node {
    Tensor value;
    Tensor grad;
    bool requires_grad = false;
    bool leaf = false;
    bool has_grad = false;
    Backward backward;
    std::string op;
  };

  Var push(Tensor value, bool requires_grad, bool leaf, Backward backward, std::string_view op) {
    if (!value.all_finite()) {
      throw NumericError("non-finite value produced by '" + std::string(op) + "'");
    }
    nodes_.push_back(
        {std::move(value), Tensor(), requires_grad, leaf, false, std::move(backward), std::string(op)});
    return Var{this, static_cast<std::uint32_t>(nodes_.size() - 1)};
  }

  std::vector<Node> nodes_;
};

inline const Tensor& Var::value() const { return tape->value(*this); }

}  // namespace signet
