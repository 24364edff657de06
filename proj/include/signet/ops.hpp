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
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "signet/error.hpp"
#include "signet/tensor.hpp"

namespace signet {

// Numerically stable logistic function.
inline double stable_sigmoid(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  double e = std::exp(x);
  return e / (1.0 + e);
}

// log(1 + exp(x)) without overflow.
inline double softplus(double x) { return std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x))); }

namespace detail {

inline void require_rank2(const Tensor& t, std::string_view op) {
  if (t.rank() != 2) throw ShapeError(std::string(op) + ": expected a matrix, got " + shape_string(t.shape()));
}

// True when b broadcasts along the last axis of a (b is a row vector).
inline bool is_row_broadcast(const Tensor& a, const Tensor& b) {
  if (a.rank() != 2) return false;
  return (b.rank() == 1 && b.size() == a.cols()) ||
         (b.rank() == 2 && b.rows() == 1 && b.cols() == a.cols() && a.rows() != 1);
}

}  // namespace detail

inline Var matmul(Var a, Var b) {
  const Tensor& A = a.value();
  const Tensor& B = b.value();
  detail::require_rank2(A, "matmul");
  detail::require_rank2(B, "matmul");
  if (A.cols() != B.rows()) {
    throw ShapeError("matmul: inner dimensions disagree " + shape_string(A.shape()) + " * " +
                     shape_string(B.shape()));
  }
  const std::size_t m = A.rows(), k = A.cols(), n = B.cols();
  Tensor C = Tensor::matrix(m, n);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t p = 0; p < k; ++p) {
      double aip = A.at(i, p);
      if (aip == 0.0) continue;
      for (std::size_t j = 0; j < n; ++j) C.at(i, j) += aip * B.at(p, j);
    }
  }
  return a.tape->record(std::move(C), {a, b}, "matmul", [a, b, m, k, n](Tape& t, const Tensor& g) {
    const Tensor& A = t.value(a);
    const Tensor& B = t.value(b);
    if (Tensor* ga = t.grad_buffer(a)) {  // dA = dC * B^T
      for (std::size_t i = 0; i < m; ++i)
        for (std::size_t p = 0; p < k; ++p) {
          double s = 0;
          for (std::size_t j = 0; j < n; ++j) s += g.at(i, j) * B.at(p, j);
          ga->at(i, p) += s;
        }
    }
    if (Tensor* gb = t.grad_buffer(b)) {  // dB = A^T * dC
      for (std::size_t i = 0; i < m; ++i)
        for (std::size_t p = 0; p < k; ++p) {
          double aip = A.at(i, p);
          if (aip == 0.0) continue;
          for (std::size_t j = 0; j < n; ++j) gb->at(p, j) += aip * g.at(i, j);
        }
    }
  });
}

namespace detail {

// Shared implementation of elementwise add / multiply with optional
// row-vector broadcast of the second operand.
template <bool kMultiply>
Var binary_elementwise(Var a, Var b, std::string_view op) {
  const Tensor& A = a.value();
  const Tensor& B = b.value();
  const bool broadcast = A.shape() != B.shape() && is_row_broadcast(A, B);
  if (A.shape() != B.shape() && !broadcast) {
    throw ShapeError(std::string(op) + ": incompatible shapes " + shape_string(A.shape()) + " and " +
                     shape_string(B.shape()));
  }
  const std::size_t cols = A.cols();
  Tensor out(A.shape());
  for (std::size_t i = 0; i < A.size(); ++i) {
    double bv = broadcast ? B[i % cols] : B[i];
    out[i] = kMultiply ? A[i] * bv : A[i] + bv;
  }
  return a.tape->record(std::move(out), {a, b}, op, [a, b, broadcast, cols](Tape& t, const Tensor& g) {
    const Tensor& A = t.value(a);
    const Tensor& B = t.value(b);
    if (Tensor* ga = t.grad_buffer(a)) {
      for (std::size_t i = 0; i < g.size(); ++i) {
        double bv = broadcast ? B[i % cols] : B[i];
        (*ga)[i] += kMultiply ? g[i] * bv : g[i];
      }
    }
    if (Tensor* gb = t.grad_buffer(b)) {
      for (std::size_t i = 0; i < g.size(); ++i) {
        std::size_t j = broadcast ? i % cols : i;
        (*gb)[j] += kMultiply ? g[i] * A[i] : g[i];
      }
    }
  });
}

}  // namespace detail

inline Var add(Var a, Var b) { return detail::binary_elementwise<false>(a, b, "add"); }

// Elementwise product. `b` may also be a row vector broadcast over a's rows.
inline Var hadamard(Var a, Var b) { return detail::binary_elementwise<true>(a, b, "hadamard"); }

inline Var scale(Var a, double s) {
  Tensor out = a.value();
  out *= s;
  return a.tape->record(std::move(out), {a}, "scale", [a, s](Tape& t, const Tensor& g) {
    if (Tensor* ga = t.grad_buffer(a))
      for (std::size_t i = 0; i < g.size(); ++i) (*ga)[i] += s * g[i];
  });
}

inline Var neg(Var a) { return scale(a, -1.0); }

inline Var sub(Var a, Var b) { return add(a, neg(b)); }

inline Var add_scalar(Var a, double s) {
  Tensor out = a.value();
  for (double& v : out.values()) v += s;
  return a.tape->record(std::move(out), {a}, "add_scalar", [a](Tape& t, const Tensor& g) {
    t.accumulate(a, g);
  });
}

inline Var relu(Var a) {
  Tensor out = a.value();
  for (double& v : out.values()) v = v > 0 ? v : 0.0;
  return a.tape->record(std::move(out), {a}, "relu", [a](Tape& t, const Tensor& g) {
    const Tensor& x = t.value(a);
    if (Tensor* ga = t.grad_buffer(a))
      for (std::size_t i = 0; i < g.size(); ++i) (*ga)[i] += x[i] > 0 ? g[i] : 0.0;
  });
}

inline Var sigmoid(Var a) {
  Tensor out = a.value();
  for (double& v : out.values()) v = stable_sigmoid(v);
  Tensor y = out;
  return a.tape->record(std::move(out), {a}, "sigmoid", [a, y = std::move(y)](Tape& t, const Tensor& g) {
    if (Tensor* ga = t.grad_buffer(a))
      for (std::size_t i = 0; i < g.size(); ++i) (*ga)[i] += g[i] * y[i] * (1.0 - y[i]);
  });
}

inline Var tanh(Var a) {
  Tensor out = a.value();
  for (double& v : out.values()) v = std::tanh(v);
  Tensor y = out;
  return a.tape->record(std::move(out), {a}, "tanh", [a, y = std::move(y)](Tape& t, const Tensor& g) {
    if (Tensor* ga = t.grad_buffer(a))
      for (std::size_t i = 0; i < g.size(); ++i) (*ga)[i] += g[i] * (1.0 - y[i] * y[i]);
  });
}

enum class Activation { kIdentity, kRelu, kTanh, kSigmoid };

inline std::string_view to_string(Activation a) {
  switch (a) {
    case Activation::kIdentity:
      return "identity";
    case Activation::kRelu:
      return "relu";
    case Activation::kTanh:
      return "tanh";
    case Activation::kSigmoid:
      return "sigmoid";
  }
  return "?";
}

inline Activation parse_activation(std::string_view s) {
  for (Activation a : {Activation::kIdentity, Activation::kRelu, Activation::kTanh, Activation::kSigmoid}) {
    if (to_string(a) == s) return a;
  }
  throw ConfigError("unknown activation '" + std::string(s) + "' (identity, relu, tanh, sigmoid)");
}

inline Var activate(Var a, Activation act) {
  switch (act) {
    case Activation::kRelu:
      return relu(a);
    case Activation::kTanh:
      return tanh(a);
    case Activation::kSigmoid:
      return sigmoid(a);
    case Activation::kIdentity:
      break;
  }
  return a;
}

inline Var square(Var a) {
  Tensor out = a.value();
  for (double& v : out.values()) v = v * v;
  return a.tape->record(std::move(out), {a}, "square", [a](Tape& t, const Tensor& g) {
    const Tensor& x = t.value(a);
    if (Tensor* ga = t.grad_buffer(a))
      for (std::size_t i = 0; i < g.size(); ++i) (*ga)[i] += 2.0 * x[i] * g[i];
  });
}

inline Var sum(Var a) {
  double s = 0;
  for (double v : a.value().values()) s += v;
  return a.tape->record(Tensor::scalar(s), {a}, "sum", [a](Tape& t, const Tensor& g) {
    if (Tensor* ga = t.grad_buffer(a))
      for (double& v : ga->values()) v += g[0];
  });
}

inline Var mean(Var a) {
  if (a.value().size() == 0) throw PreconditionError("mean of an empty tensor");
  return scale(sum(a), 1.0 / static_cast<double>(a.value().size()));
}

// Sum of squared entries.
inline Var sum_squares(Var a) {
  return a.tape->record(Tensor::scalar(a.value().squared_norm()), {a}, "sum_squares",
                        [a](Tape& t, const Tensor& g) {
                          const Tensor& x = t.value(a);
                          if (Tensor* ga = t.grad_buffer(a))
                            for (std::size_t i = 0; i < x.size(); ++i) (*ga)[i] += 2.0 * x[i] * g[0];
                        });
}

// [n x c] -> [n]: sums each row.
inline Var row_sum(Var a) {
  const Tensor& A = a.value();
  const std::size_t n = A.rows(), c = A.cols();
  Tensor out(Shape{n});
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < c; ++j) out[i] += A[i * c + j];
  return a.tape->record(std::move(out), {a}, "row_sum", [a, c](Tape& t, const Tensor& g) {
    if (Tensor* ga = t.grad_buffer(a))
      for (std::size_t i = 0; i < ga->size(); ++i) (*ga)[i] += g[i / c];
  });
}

// [n x c] -> [n]: Euclidean norm of each row. The subgradient at 0 is 0.
inline Var row_norm(Var a) {
  const Tensor& A = a.value();
  const std::size_t n = A.rows(), c = A.cols();
  Tensor out(Shape{n});
  for (std::size_t i = 0; i < n; ++i) {
    double s = 0;
    for (std::size_t j = 0; j < c; ++j) s += A[i * c + j] * A[i * c + j];
    out[i] = std::sqrt(s);
  }
  Tensor norms = out;
  return a.tape->record(std::move(out), {a}, "row_norm", [a, c, norms = std::move(norms)](Tape& t, const Tensor& g) {
    const Tensor& x = t.value(a);
    if (Tensor* ga = t.grad_buffer(a))
      for (std::size_t i = 0; i < ga->size(); ++i) {
        double nrm = norms[i / c];
        if (nrm > 0) (*ga)[i] += g[i / c] * x[i] / nrm;
      }
  });
}

// Selects rows of a matrix; the backward rule scatter-adds.
inline Var gather_rows(Var a, std::vector<std::uint32_t> index) {
  const Tensor& A = a.value();
  detail::require_rank2(A, "gather_rows");
  const std::size_t c = A.cols();
  Tensor out = Tensor::matrix(index.size(), c);
  for (std::size_t i = 0; i < index.size(); ++i) {
    if (index[i] >= A.rows()) {
      throw ShapeError("gather_rows: index " + std::to_string(index[i]) + " out of range for " +
                       shape_string(A.shape()));
    }
    std::copy_n(A.row(index[i]).begin(), c, out.row(i).begin());
  }
  return a.tape->record(std::move(out), {a}, "gather_rows", [a, c, index = std::move(index)](Tape& t, const Tensor& g) {
    if (Tensor* ga = t.grad_buffer(a))
      for (std::size_t i = 0; i < index.size(); ++i)
        for (std::size_t j = 0; j < c; ++j) ga->at(index[i], j) += g.at(i, j);
  });
}

// Row-compressed sparse matrix with explicit coefficients.
struct SparseRows {
  std::size_t n_rows = 0;
  std::size_t n_cols = 0;
  std::vector<std::uint32_t> row_ptr{0};
  std::vector<std::uint32_t> col;
  std::vector<double> coef;

  void push(std::uint32_t c, double v) {
    col.push_back(c);
    coef.push_back(v);
  }
  void end_row() {
    row_ptr.push_back(static_cast<std::uint32_t>(col.size()));
    ++n_rows;
  }
  std::size_t nnz() const { return col.size(); }
};

// out[i] = sum_j S[i, j] * x[j]: neighbor gather with per-edge weights.
inline Var propagate(std::shared_ptr<const SparseRows> s, Var x) {
  const Tensor& X = x.value();
  detail::require_rank2(X, "propagate");
  if (s->n_cols != X.rows()) {
    throw ShapeError("propagate: operator has " + std::to_string(s->n_cols) + " columns, input " +
                     shape_string(X.shape()));
  }
  const std::size_t c = X.cols();
  Tensor out = Tensor::matrix(s->n_rows, c);
  for (std::size_t i = 0; i < s->n_rows; ++i)
    for (std::uint32_t e = s->row_ptr[i]; e < s->row_ptr[i + 1]; ++e) {
      const double w = s->coef[e];
      auto src = X.row(s->col[e]);
      auto dst = out.row(i);
      for (std::size_t j = 0; j < c; ++j) dst[j] += w * src[j];
    }
  return x.tape->record(std::move(out), {x}, "propagate", [x, s, c](Tape& t, const Tensor& g) {
    if (Tensor* gx = t.grad_buffer(x))
      for (std::size_t i = 0; i < s->n_rows; ++i)
        for (std::uint32_t e = s->row_ptr[i]; e < s->row_ptr[i + 1]; ++e) {
          const double w = s->coef[e];
          auto dst = gx->row(s->col[e]);
          for (std::size_t j = 0; j < c; ++j) dst[j] += w * g.at(i, j);
        }
  });
}

// Column-wise concatenation of matrices with equal row counts.
inline Var concat_cols(std::vector<Var> parts) {
  if (parts.empty()) throw ShapeError("concat_cols: no inputs");
  const std::size_t n = parts[0].value().rows();
  std::vector<std::size_t> widths;
  std::size_t total = 0;
  for (Var p : parts) {
    detail::require_rank2(p.value(), "concat_cols");
    if (p.value().rows() != n) throw ShapeError("concat_cols: row counts differ");
    widths.push_back(p.value().cols());
    total += p.value().cols();
  }
  if (parts.size() == 1) return parts[0];
  Tensor out = Tensor::matrix(n, total);
  std::size_t off = 0;
  for (std::size_t k = 0; k < parts.size(); ++k) {
    const Tensor& P = parts[k].value();
    for (std::size_t i = 0; i < n; ++i) std::copy_n(P.row(i).begin(), widths[k], out.row(i).begin() + off);
    off += widths[k];
  }
  Tape* tape = parts[0].tape;
  std::vector<Var> inputs = parts;
  return tape->record(std::move(out), std::span<const Var>(inputs), "concat_cols",
                      [parts = std::move(parts), widths = std::move(widths), n](Tape& t, const Tensor& g) {
                        std::size_t off = 0;
                        for (std::size_t k = 0; k < parts.size(); ++k) {
                          if (Tensor* gp = t.grad_buffer(parts[k]))
                            for (std::size_t i = 0; i < n; ++i)
                              for (std::size_t j = 0; j < widths[k]; ++j) gp->at(i, j) += g.at(i, off + j);
                          off += widths[k];
                        }
                      });
}

// sum_b coef[row, b] * bases[b]: one relation's weight in a basis decomposition.
inline Var mix(const std::vector<Var>& bases, Var coef, std::size_t row) {
  const Tensor& C = coef.value();
  detail::require_rank2(C, "mix");
  if (bases.empty() || C.cols() != bases.size() || row >= C.rows()) {
    throw ShapeError("mix: coefficient matrix " + shape_string(C.shape()) + " does not match " +
                     std::to_string(bases.size()) + " bases");
  }
  Tensor out(bases[0].value().shape());
  for (std::size_t b = 0; b < bases.size(); ++b) {
    bases[b].value().require_same_shape(out, "mix");
    const double w = C.at(row, b);
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += w * bases[b].value()[i];
  }
  std::vector<Var> inputs = bases;
  inputs.push_back(coef);
  return coef.tape->record(std::move(out), std::span<const Var>(inputs), "mix",
                           [bases, coef, row](Tape& t, const Tensor& g) {
                             const Tensor& C = t.value(coef);
                             Tensor* gc = t.grad_buffer(coef);
                             for (std::size_t b = 0; b < bases.size(); ++b) {
                               const Tensor& B = t.value(bases[b]);
                               if (Tensor* gb = t.grad_buffer(bases[b]))
                                 for (std::size_t i = 0; i < g.size(); ++i) (*gb)[i] += C.at(row, b) * g[i];
                               if (gc) {
                                 double s = 0;
                                 for (std::size_t i = 0; i < g.size(); ++i) s += B[i] * g[i];
                                 gc->at(row, b) += s;
                               }
                             }
                           });
}

// Mean binary cross-entropy on raw logits (fused, overflow-free).
inline Var bce_with_logits(Var logits, std::vector<double> labels) {
  const Tensor& Z = logits.value();
  if (Z.size() == 0) throw PreconditionError("bce_with_logits: empty batch");
  if (Z.size() != labels.size()) throw ShapeError("bce_with_logits: label count mismatch");
  const double n = static_cast<double>(Z.size());
  double loss = 0;
  for (std::size_t i = 0; i < Z.size(); ++i) loss += softplus(Z[i]) - labels[i] * Z[i];
  return logits.tape->record(Tensor::scalar(loss / n), {logits}, "bce_with_logits",
                             [logits, n, labels = std::move(labels)](Tape& t, const Tensor& g) {
                               const Tensor& Z = t.value(logits);
                               if (Tensor* gz = t.grad_buffer(logits))
                                 for (std::size_t i = 0; i < Z.size(); ++i)
                                   (*gz)[i] += g[0] * (stable_sigmoid(Z[i]) - labels[i]) / n;
                             });
}

inline constexpr double kProbabilityClamp = 1e-12;

// Mean binary cross-entropy on probabilities, clamped to [1e-12, 1 - 1e-12].
inline Var bce(Var probs, std::vector<double> labels) {
  const Tensor& P = probs.value();
  if (P.size() == 0) throw PreconditionError("bce: empty batch");
  if (P.size() != labels.size()) throw ShapeError("bce: label count mismatch");
  const double n = static_cast<double>(P.size());
  auto clamp = [](double p) { return std::clamp(p, kProbabilityClamp, 1.0 - kProbabilityClamp); };
  double loss = 0;
  for (std::size_t i = 0; i < P.size(); ++i) {
    double p = clamp(P[i]);
    loss -= labels[i] * std::log(p) + (1.0 - labels[i]) * std::log(1.0 - p);
  }
  return probs.tape->record(Tensor::scalar(loss / n), {probs}, "bce",
                            [probs, n, clamp, labels = std::move(labels)](Tape& t, const Tensor& g) {
                              const Tensor& P = t.value(probs);
                              if (Tensor* gp = t.grad_buffer(probs))
                                for (std::size_t i = 0; i < P.size(); ++i) {
                                  double p = clamp(P[i]);
                                  (*gp)[i] += g[0] * (-labels[i] / p + (1.0 - labels[i]) / (1.0 - p)) / n;
                                }
                            });
}

}  // namespace signet
