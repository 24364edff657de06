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

#include <memory>
#include <span>
#include <string>
#include <vector>

#include "signet/encoder.hpp"
#include "signet/error.hpp"
#include "signet/graph.hpp"
#include "signet/ops.hpp"
#include "signet/params.hpp"

namespace signet {

// Row-normalized propagation (c_ij = |N_i^r|) over the chemical-gene
// relations, without a self term.
inline Propagation refine_propagation(const HeteroGraph& g) {
  Propagation p;
  p.n_nodes = g.num_nodes();
  for (RelationType r : kAllRelations) {
    auto nb = [&](std::uint32_t i) { return g.neighbors(r, i); };
    auto deg = [&](std::uint32_t i) { return g.degree(r, i); };
    p.channels.push_back(detail::channel_operator(p.n_nodes, nb, deg, [](double di, double) { return 1.0 / di; }));
  }
  return p;
}

// H'_i = act( sum_r sum_{j in N_i^r} W_r H_j / c_ij ).
inline Var rgcn_refine(Var h, const Propagation& plan, const std::vector<Var>& relation_weights, Activation act) {
  if (relation_weights.size() != plan.channels.size()) {
    throw ShapeError("rgcn_refine: " + std::to_string(relation_weights.size()) + " weights for " +
                     std::to_string(plan.channels.size()) + " relations");
  }
  std::optional<Var> total;
  for (std::size_t r = 0; r < plan.channels.size(); ++r) {
    Var msg = propagate(plan.channels[r], matmul(h, relation_weights[r]));
    total = total ? add(*total, msg) : msg;
  }
  return activate(*total, act);
}

// RGCN layer whose relation weights are mixtures of shared bases:
// W_r = sum_b coef[r, b] * V_b.
class BasisRgcnLayer {
 public:
  BasisRgcnLayer() = default;
  BasisRgcnLayer(const std::string& prefix, std::size_t d_in, std::size_t d_out, std::size_t n_bases,
                 ParamStore& store, Rng& rng)
      : d_in_(d_in), d_out_(d_out) {
    if (n_bases == 0) throw ConfigError("n_bases must be >= 1");
    for (std::size_t b = 0; b < n_bases; ++b) {
      bases_.push_back(store.add(prefix + ".basis" + std::to_string(b), glorot(d_in, d_out, rng)));
    }
    coef_ = store.add(prefix + ".coef", glorot(kNumRelations, n_bases, rng));
  }

  std::size_t input_dim() const { return d_in_; }
  std::size_t output_dim() const { return d_out_; }

  std::vector<Var> relation_weights(std::span<const Var> params) const {
    std::vector<Var> bases;
    for (std::size_t idx : bases_) bases.push_back(params[idx]);
    std::vector<Var> w;
    for (std::size_t r = 0; r < kNumRelations; ++r) w.push_back(mix(bases, params[coef_], r));
    return w;
  }

  Var forward(std::span<const Var> params, Var h, const Propagation& plan, Activation act) const {
    if (h.value().cols() != d_in_) {
      throw ShapeError("rgcn layer expects input width " + std::to_string(d_in_) + ", got " +
                       shape_string(h.shape()));
    }
    return rgcn_refine(h, plan, relation_weights(params), act);
  }

 private:
  std::size_t d_in_ = 0;
  std::size_t d_out_ = 0;
  std::vector<std::size_t> bases_;
  std::size_t coef_ = 0;
};

inline std::vector<std::uint32_t> head_nodes(std::span<const Triplet> ts) {
  std::vector<std::uint32_t> out;
  out.reserve(ts.size());
  for (const Triplet& t : ts) out.push_back(t.head);
  return out;
}

inline std::vector<std::uint32_t> tail_nodes(std::span<const Triplet> ts, std::size_t n_chem) {
  std::vector<std::uint32_t> out;
  out.reserve(ts.size());
  for (const Triplet& t : ts) out.push_back(static_cast<std::uint32_t>(n_chem + t.tail));
  return out;
}

inline std::vector<std::uint32_t> relation_indices(std::span<const Triplet> ts) {
  std::vector<std::uint32_t> out;
  out.reserve(ts.size());
  for (const Triplet& t : ts) out.push_back(static_cast<std::uint32_t>(index_of(t.relation)));
  return out;
}

// Tensor-decomposition logit per row:
//   sum_k mixing[r, k] * <E_i (.) E_j (.) factors[k]>
// computed as <E_i (.) E_j (.) D_r> with D = mixing * factors.
inline Var dedicom_logits(Var heads, Var tails, Var mixing, Var factors, std::vector<std::uint32_t> relations) {
  Var diag = gather_rows(matmul(mixing, factors), std::move(relations));
  return row_sum(hadamard(hadamard(heads, tails), diag));
}

// Single-pair probability straight from the closed form; the reference the
// batched path is tested against.
inline double dedicom_score(std::span<const double> ei, std::span<const double> ej, const Tensor& mixing,
                            const Tensor& factors, std::size_t relation) {
  double logit = 0;
  for (std::size_t k = 0; k < factors.rows(); ++k) {
    double inner = 0;
    for (std::size_t d = 0; d < ei.size(); ++d) inner += ei[d] * ej[d] * factors.at(k, d);
    logit += mixing.at(relation, k) * inner;
  }
  return stable_sigmoid(logit);
}

// Basis-DEDICOM scorer: K global interaction vectors R_k mixed by
// relation-specific coefficients a_{r,k}.
class DedicomScorer {
 public:
  DedicomScorer() = default;
  DedicomScorer(const std::string& prefix, std::size_t dim, std::size_t n_factors, ParamStore& store, Rng& rng) {
    if (n_factors == 0) throw ConfigError("n_factors must be >= 1");
    factors_ = store.add(prefix + ".factors", glorot(n_factors, dim, rng));
    mixing_ = store.add(prefix + ".mixing", glorot(kNumRelations, n_factors, rng));
  }

  std::size_t factors_index() const { return factors_; }
  std::size_t mixing_index() const { return mixing_; }

  Var logits(std::span<const Var> params, Var states, std::span<const Triplet> ts, std::size_t n_chem) const {
    Var heads = gather_rows(states, head_nodes(ts));
    Var tails = gather_rows(states, tail_nodes(ts, n_chem));
    return dedicom_logits(heads, tails, params[mixing_], params[factors_], relation_indices(ts));
  }

 private:
  std::size_t factors_ = 0;
  std::size_t mixing_ = 0;
};

}  // namespace signet
