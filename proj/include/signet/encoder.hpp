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
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "signet/error.hpp"
#include "signet/graph.hpp"
#include "signet/ops.hpp"
#include "signet/params.hpp"

namespace signet {

// Per-channel neighbor operators for one message-passing branch. A channel
// is one relation type (or one homogeneous subgraph).
struct Propagation {
  std::size_t n_nodes = 0;
  std::vector<std::shared_ptr<const SparseRows>> channels;
  // Diagonal self-term coefficients; null for branches without a self term.
  std::shared_ptr<const SparseRows> self;
};

namespace detail {

// Builds one operator from a neighbor function. `norm(deg_i, deg_j)` gives
// the edge coefficient.
template <typename Neighbors, typename Degree, typename Norm>
std::shared_ptr<const SparseRows> channel_operator(std::size_t n, Neighbors&& nb, Degree&& deg, Norm&& norm) {
  auto s = std::make_shared<SparseRows>();
  s->n_cols = n;
  for (std::uint32_t i = 0; i < n; ++i) {
    const double di = deg(i);
    for (std::uint32_t j : nb(i)) s->push(j, norm(di, static_cast<double>(deg(j))));
    s->end_row();
  }
  return s;
}

// Self coefficient of node i: sum over channels with nonzero degree of
// 1/deg, or 1 when the node is isolated under every channel.
inline std::shared_ptr<const SparseRows> self_operator(std::size_t n,
                                                       const std::vector<std::vector<std::uint32_t>>& degrees) {
  auto s = std::make_shared<SparseRows>();
  s->n_cols = n;
  for (std::uint32_t i = 0; i < n; ++i) {
    double c = 0;
    bool any = false;
    for (const auto& deg : degrees) {
      if (deg[i] > 0) {
        c += 1.0 / deg[i];
        any = true;
      }
    }
    s->push(i, any ? c : 1.0);
    s->end_row();
  }
  return s;
}

inline double symmetric_norm(double di, double dj) { return 1.0 / std::sqrt(di * dj); }

}  // namespace detail

// Symmetric-normalized propagation over the four chemical-gene relations.
inline Propagation relation_propagation(const HeteroGraph& g) {
  Propagation p;
  p.n_nodes = g.num_nodes();
  std::vector<std::vector<std::uint32_t>> degrees;
  for (RelationType r : kAllRelations) {
    auto nb = [&](std::uint32_t i) { return g.neighbors(r, i); };
    auto deg = [&](std::uint32_t i) { return g.degree(r, i); };
    p.channels.push_back(detail::channel_operator(p.n_nodes, nb, deg, detail::symmetric_norm));
    std::vector<std::uint32_t> d(p.n_nodes);
    for (std::uint32_t i = 0; i < p.n_nodes; ++i) d[i] = g.degree(r, i);
    degrees.push_back(std::move(d));
  }
  p.self = detail::self_operator(p.n_nodes, degrees);
  return p;
}

// Symmetric-normalized propagation over one homogeneous subgraph.
inline Propagation subgraph_propagation(const HeteroGraph& g, Subgraph s) {
  if (g.subgraph_edges(s).empty()) {
    throw ConfigError(std::string(to_string(s)) + " subgraph enabled but the graph has no such edges");
  }
  Propagation p;
  p.n_nodes = g.num_nodes();
  auto nb = [&](std::uint32_t i) { return g.neighbors(s, i); };
  auto deg = [&](std::uint32_t i) { return g.degree(s, i); };
  p.channels.push_back(detail::channel_operator(p.n_nodes, nb, deg, detail::symmetric_norm));
  std::vector<std::uint32_t> d(p.n_nodes);
  for (std::uint32_t i = 0; i < p.n_nodes; ++i) d[i] = g.degree(s, i);
  p.self = detail::self_operator(p.n_nodes, {d});
  return p;
}

struct LayerWeights {
  std::vector<Var> relation;
  // Ignored when self_identity is set.
  Var self;
  bool self_identity = false;
};

// h' = act( sum_r sum_{j in N_i^r} W_r h_j / sqrt(|N_i^r||N_j^r|) + s_i * S h_i )
// with s_i = sum_{r : |N_i^r| > 0} 1/|N_i^r| (1 for nodes isolated under every
// relation) and S the self path (learned matrix or identity).
//
// `features == nullopt` stands for one-hot inputs: the projection h W is then
// a row select, i.e. W itself.
inline Var rgc_layer(std::optional<Var> features, const Propagation& plan, const LayerWeights& w,
                     Activation act) {
  if (w.relation.size() != plan.channels.size()) {
    throw ShapeError("rgc_layer: " + std::to_string(w.relation.size()) + " weights for " +
                     std::to_string(plan.channels.size()) + " relations");
  }
  auto project = [&](Var weight) {
    if (!features) {
      if (weight.value().rows() != plan.n_nodes) {
        throw ShapeError("rgc_layer: one-hot input needs " + std::to_string(plan.n_nodes) +
                         " weight rows, got " + shape_string(weight.shape()));
      }
      return weight;
    }
    return matmul(*features, weight);
  };
  std::optional<Var> total;
  for (std::size_t r = 0; r < plan.channels.size(); ++r) {
    Var msg = propagate(plan.channels[r], project(w.relation[r]));
    total = total ? add(*total, msg) : msg;
  }
  Var self_in;
  if (w.self_identity) {
    Tape* tape = w.relation.front().tape;
    self_in = features ? *features : tape->constant(Tensor::identity(plan.n_nodes));
  } else {
    self_in = project(w.self);
  }
  Var self = propagate(plan.self, self_in);
  total = total ? add(*total, self) : self;
  return activate(*total, act);
}

struct EncoderConfig {
  std::vector<std::size_t> hidden_dimensions{32, 16};
  Activation activation = Activation::kRelu;
  bool chem_subgraph = false;
  bool gene_subgraph = false;
};

struct EncoderPlan {
  Propagation hetero;
  std::optional<Propagation> chem;
  std::optional<Propagation> gene;
};

inline EncoderPlan make_encoder_plan(const HeteroGraph& g, const EncoderConfig& cfg) {
  EncoderPlan plan;
  plan.hetero = relation_propagation(g);
  if (cfg.chem_subgraph) plan.chem = subgraph_propagation(g, Subgraph::kChemical);
  if (cfg.gene_subgraph) plan.gene = subgraph_propagation(g, Subgraph::kGene);
  return plan;
}

// Relational GCN encoder over one-hot node inputs. The hetero branch and
// each enabled homogeneous-subgraph branch run their own layer stack; their
// outputs are concatenated per node.
class Encoder {
 public:
  Encoder(std::size_t n_nodes, EncoderConfig cfg, ParamStore& store, Rng& rng)
      : cfg_(std::move(cfg)), n_nodes_(n_nodes) {
    if (cfg_.hidden_dimensions.empty()) throw ConfigError("hidden_dimensions must not be empty");
    for (std::size_t d : cfg_.hidden_dimensions) {
      if (d == 0) throw ConfigError("hidden_dimensions entries must be positive");
    }
    hetero_ = register_branch("enc.hetero", kNumRelations, store, rng);
    if (cfg_.chem_subgraph) chem_ = register_branch("enc.chem", 1, store, rng);
    if (cfg_.gene_subgraph) gene_ = register_branch("enc.gene", 1, store, rng);
  }

  const EncoderConfig& config() const { return cfg_; }

  std::size_t output_dim() const {
    std::size_t branches = 1 + (chem_ ? 1 : 0) + (gene_ ? 1 : 0);
    return branches * cfg_.hidden_dimensions.back();
  }

  Var encode(std::span<const Var> params, const EncoderPlan& plan) const {
    std::vector<Var> parts{run_branch(hetero_, params, plan.hetero)};
    if (chem_) {
      if (!plan.chem) throw ConfigError("chemical subgraph branch has no propagation plan");
      parts.push_back(run_branch(*chem_, params, *plan.chem));
    }
    if (gene_) {
      if (!plan.gene) throw ConfigError("gene subgraph branch has no propagation plan");
      parts.push_back(run_branch(*gene_, params, *plan.gene));
    }
    return concat_cols(std::move(parts));
  }

 private:
  struct Branch {
    // [layer][channel] parameter indices.
    std::vector<std::vector<std::size_t>> relation;
    std::vector<std::size_t> self;
  };

  Branch register_branch(const std::string& prefix, std::size_t n_channels, ParamStore& store, Rng& rng) {
    Branch b;
    std::size_t d_in = n_nodes_;
    for (std::size_t k = 0; k < cfg_.hidden_dimensions.size(); ++k) {
      const std::size_t d_out = cfg_.hidden_dimensions[k];
      const std::string layer = prefix + ".l" + std::to_string(k);
      std::vector<std::size_t> rel;
      for (std::size_t r = 0; r < n_channels; ++r) {
        std::string name = n_channels == kNumRelations ? std::string(to_string(kAllRelations[r])) : "edge";
        rel.push_back(store.add(layer + "." + name, glorot(d_in, d_out, rng)));
      }
      b.relation.push_back(std::move(rel));
      b.self.push_back(store.add(layer + ".self", glorot(d_in, d_out, rng)));
      d_in = d_out;
    }
    return b;
  }

  Var run_branch(const Branch& b, std::span<const Var> params, const Propagation& plan) const {
    std::optional<Var> h;
    for (std::size_t k = 0; k < b.relation.size(); ++k) {
      LayerWeights w;
      for (std::size_t idx : b.relation[k]) w.relation.push_back(params[idx]);
      w.self = params[b.self[k]];
      h = rgc_layer(h, plan, w, cfg_.activation);
    }
    return *h;
  }

  EncoderConfig cfg_;
  std::size_t n_nodes_;
  Branch hetero_;
  std::optional<Branch> chem_;
  std::optional<Branch> gene_;
};

}  // namespace signet
