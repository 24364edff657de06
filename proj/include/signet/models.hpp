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
#include <array>
#include <cmath>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "signet/decoder.hpp"
#include "signet/encoder.hpp"
#include "signet/error.hpp"
#include "signet/graph.hpp"
#include "signet/ops.hpp"
#include "signet/params.hpp"
#include "signet/random.hpp"

namespace signet {

enum class ModelKind : std::uint8_t { kRgcntd, kRgcn, kGraphSage, kTransE };

inline constexpr std::array<ModelKind, 4> kAllModels = {ModelKind::kRgcntd, ModelKind::kRgcn,
                                                        ModelKind::kGraphSage, ModelKind::kTransE};

inline std::string_view to_string(ModelKind k) {
  switch (k) {
    case ModelKind::kRgcntd:
      return "rgcntd";
    case ModelKind::kRgcn:
      return "rgcn";
    case ModelKind::kGraphSage:
      return "graphsage";
    case ModelKind::kTransE:
      return "transe";
  }
  return "?";
}

inline ModelKind parse_model(std::string_view s) {
  for (ModelKind k : kAllModels) {
    if (to_string(k) == s) return k;
  }
  throw ConfigError("unknown model '" + std::string(s) + "'; valid values: rgcntd, rgcn, graphsage, transe");
}

struct ModelConfig {
  ModelKind kind = ModelKind::kRgcntd;
  std::vector<std::size_t> hidden_dimensions{32, 16};
  Activation activation = Activation::kRelu;
  Activation refine_activation = Activation::kRelu;
  bool chem_subgraph = false;
  bool gene_subgraph = false;
  std::size_t n_bases = 4;
  std::size_t n_factors = 4;
  double transe_margin = 2.0;
  std::size_t sage_sample_size = 10;
};

// Common surface of RGCNTD and the baselines: node states computed over a
// message-passing graph, then a per-triplet logit. Probabilities are
// sigmoid(logit).
class LinkModel {
 public:
  LinkModel(ModelConfig cfg, std::size_t n_chem, std::size_t n_gene)
      : cfg_(std::move(cfg)), n_chem_(n_chem), n_gene_(n_gene) {}
  virtual ~LinkModel() = default;

  ModelKind kind() const { return cfg_.kind; }
  const ModelConfig& config() const { return cfg_; }
  ParamStore& params() { return params_; }
  const ParamStore& params() const { return params_; }
  std::size_t num_chemicals() const { return n_chem_; }
  std::size_t num_genes() const { return n_gene_; }
  std::size_t num_nodes() const { return n_chem_ + n_gene_; }

  // Binds the graph whose edges carry messages (training edges plus any
  // enabled homogeneous subgraphs).
  virtual void prepare(const HeteroGraph& message_graph) = 0;

  // Redraws stochastic structure (GraphSAGE neighbor samples). No-op for
  // deterministic models.
  virtual void resample(std::uint64_t /*seed*/) {}

  virtual Var node_states(Tape& tape, std::span<const Var> params) const = 0;
  virtual Var logits(std::span<const Var> params, Var states, std::span<const Triplet> ts) const = 0;

 protected:
  void require_nodes(const HeteroGraph& g) const {
    if (g.num_chemicals() != n_chem_ || g.num_genes() != n_gene_) {
      throw ConfigError("message graph node counts differ from the model's");
    }
  }

  ModelConfig cfg_;
  std::size_t n_chem_;
  std::size_t n_gene_;
  ParamStore params_;
};

// Relational GCN encoder, RGCN refinement layer and basis-DEDICOM scorer.
class RgcntdModel final : public LinkModel {
 public:
  RgcntdModel(const ModelConfig& cfg, std::size_t n_chem, std::size_t n_gene, Rng& rng)
      : LinkModel(cfg, n_chem, n_gene),
        encoder_(n_chem + n_gene,
                 EncoderConfig{cfg.hidden_dimensions, cfg.activation, cfg.chem_subgraph, cfg.gene_subgraph},
                 params_, rng) {
    const std::size_t d = encoder_.output_dim();
    refine_ = BasisRgcnLayer("dec.rgcn", d, d, cfg.n_bases, params_, rng);
    scorer_ = DedicomScorer("dec.td", d, cfg.n_factors, params_, rng);
  }

  void prepare(const HeteroGraph& g) override {
    require_nodes(g);
    encoder_plan_ = make_encoder_plan(g, encoder_.config());
    refine_plan_ = refine_propagation(g);
  }

  Var node_states(Tape&, std::span<const Var> p) const override {
    Var z = encoder_.encode(p, encoder_plan_);
    return refine_.forward(p, z, refine_plan_, cfg_.refine_activation);
  }

  Var logits(std::span<const Var> p, Var states, std::span<const Triplet> ts) const override {
    return scorer_.logits(p, states, ts, n_chem_);
  }

  const Encoder& encoder() const { return encoder_; }
  const DedicomScorer& scorer() const { return scorer_; }

 private:
  Encoder encoder_;
  BasisRgcnLayer refine_;
  DedicomScorer scorer_;
  EncoderPlan encoder_plan_;
  Propagation refine_plan_;
};

// DistMult: sum(e_h (.) w_r (.) e_t) with one diagonal vector per relation.
inline Var distmult_logits(Var states, Var relation_vectors, std::span<const Triplet> ts, std::size_t n_chem) {
  Var heads = gather_rows(states, head_nodes(ts));
  Var tails = gather_rows(states, tail_nodes(ts, n_chem));
  Var rel = gather_rows(relation_vectors, relation_indices(ts));
  return row_sum(hadamard(hadamard(heads, tails), rel));
}

// Learned input embeddings, one basis-decomposed RGCN layer, DistMult head.
class RgcnModel final : public LinkModel {
 public:
  RgcnModel(const ModelConfig& cfg, std::size_t n_chem, std::size_t n_gene, Rng& rng)
      : LinkModel(cfg, n_chem, n_gene) {
    const std::size_t d_in = cfg.hidden_dimensions.front();
    const std::size_t d_out = cfg.hidden_dimensions.back();
    embed_ = params_.add("rgcn.embedding", glorot(num_nodes(), d_in, rng));
    layer_ = BasisRgcnLayer("rgcn.layer", d_in, d_out, cfg.n_bases, params_, rng);
    relations_ = params_.add("rgcn.relation", glorot(kNumRelations, d_out, rng));
  }

  void prepare(const HeteroGraph& g) override {
    require_nodes(g);
    plan_ = refine_propagation(g);
  }

  Var node_states(Tape&, std::span<const Var> p) const override {
    return layer_.forward(p, p[embed_], plan_, cfg_.refine_activation);
  }

  Var logits(std::span<const Var> p, Var states, std::span<const Triplet> ts) const override {
    return distmult_logits(states, p[relations_], ts, n_chem_);
  }

  const BasisRgcnLayer& layer() const { return layer_; }

 private:
  std::size_t embed_ = 0;
  BasisRgcnLayer layer_;
  std::size_t relations_ = 0;
  Propagation plan_;
};

// Mean-aggregator GraphSAGE layer over a per-epoch neighbor sample, scored
// with a per-relation diagonal bilinear form:
//   h_i = act(x_i S + mean_{j in sample(i)} x_j N)
class GraphSageModel final : public LinkModel {
 public:
  GraphSageModel(const ModelConfig& cfg, std::size_t n_chem, std::size_t n_gene, Rng& rng)
      : LinkModel(cfg, n_chem, n_gene) {
    if (cfg.sage_sample_size == 0) throw ConfigError("sage_sample_size must be >= 1");
    const std::size_t d_in = cfg.hidden_dimensions.front();
    const std::size_t d_out = cfg.hidden_dimensions.back();
    embed_ = params_.add("sage.embedding", glorot(num_nodes(), d_in, rng));
    self_ = params_.add("sage.self", glorot(d_in, d_out, rng));
    neigh_ = params_.add("sage.neighbor", glorot(d_in, d_out, rng));
    relations_ = params_.add("sage.relation", glorot(kNumRelations, d_out, rng));
  }

  void prepare(const HeteroGraph& g) override {
    require_nodes(g);
    neighbors_.assign(num_nodes(), {});
    for (std::uint32_t i = 0; i < num_nodes(); ++i) {
      auto& list = neighbors_[i];
      for (RelationType r : kAllRelations) {
        auto nb = g.neighbors(r, i);
        list.insert(list.end(), nb.begin(), nb.end());
      }
      std::sort(list.begin(), list.end());
      list.erase(std::unique(list.begin(), list.end()), list.end());
    }
    resample(0);
  }

  void resample(std::uint64_t seed) override {
    Rng rng(seed);
    auto s = std::make_shared<SparseRows>();
    s->n_cols = num_nodes();
    std::vector<std::uint32_t> pool;
    for (const auto& list : neighbors_) {
      pool = list;
      const std::size_t take = std::min(pool.size(), cfg_.sage_sample_size);
      // Partial Fisher-Yates: first `take` entries form the sample.
      for (std::size_t k = 0; k < take; ++k) {
        std::size_t j = k + uniform_index(rng, static_cast<std::uint32_t>(pool.size() - k));
        std::swap(pool[k], pool[j]);
      }
      std::sort(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(take));
      for (std::size_t k = 0; k < take; ++k) s->push(pool[k], 1.0 / static_cast<double>(take));
      s->end_row();
    }
    sample_ = std::move(s);
  }

  Var node_states(Tape&, std::span<const Var> p) const override {
    Var x = p[embed_];
    Var self = matmul(x, p[self_]);
    Var agg = matmul(propagate(sample_, x), p[neigh_]);
    return activate(add(self, agg), cfg_.activation);
  }

  Var logits(std::span<const Var> p, Var states, std::span<const Triplet> ts) const override {
    return distmult_logits(states, p[relations_], ts, n_chem_);
  }

  const SparseRows& sample() const { return *sample_; }

 private:
  std::size_t embed_ = 0, self_ = 0, neigh_ = 0, relations_ = 0;
  std::vector<std::vector<std::uint32_t>> neighbors_;
  std::shared_ptr<const SparseRows> sample_;
};

// Translation embedding scored as sigmoid(margin - ||e_h + w_r - e_t||).
class TransEModel final : public LinkModel {
 public:
  TransEModel(const ModelConfig& cfg, std::size_t n_chem, std::size_t n_gene, Rng& rng)
      : LinkModel(cfg, n_chem, n_gene) {
    const std::size_t d = cfg.hidden_dimensions.back();
    const double limit = 1.0 / std::sqrt(static_cast<double>(d));
    entities_ = params_.add("transe.entity", uniform_tensor({num_nodes(), d}, limit, rng));
    relations_ = params_.add("transe.relation", uniform_tensor({kNumRelations, d}, limit, rng));
  }

  void prepare(const HeteroGraph& g) override { require_nodes(g); }

  Var node_states(Tape&, std::span<const Var> p) const override { return p[entities_]; }

  Var logits(std::span<const Var> p, Var states, std::span<const Triplet> ts) const override {
    Var heads = gather_rows(states, head_nodes(ts));
    Var tails = gather_rows(states, tail_nodes(ts, n_chem_));
    Var rel = gather_rows(p[relations_], relation_indices(ts));
    Var dist = row_norm(sub(add(heads, rel), tails));
    return add_scalar(neg(dist), cfg_.transe_margin);
  }

 private:
  std::size_t entities_ = 0;
  std::size_t relations_ = 0;
};

inline std::unique_ptr<LinkModel> make_model(const ModelConfig& cfg, std::size_t n_chem, std::size_t n_gene,
                                             std::uint64_t seed) {
  if (cfg.hidden_dimensions.empty()) throw ConfigError("hidden_dimensions must not be empty");
  if (cfg.kind != ModelKind::kRgcntd && (cfg.chem_subgraph || cfg.gene_subgraph)) {
    throw ConfigError("subgraph branches are only available for rgcntd");
  }
  Rng rng(derive_seed(seed, 0x1417));
  switch (cfg.kind) {
    case ModelKind::kRgcntd:
      return std::make_unique<RgcntdModel>(cfg, n_chem, n_gene, rng);
    case ModelKind::kRgcn:
      return std::make_unique<RgcnModel>(cfg, n_chem, n_gene, rng);
    case ModelKind::kGraphSage:
      return std::make_unique<GraphSageModel>(cfg, n_chem, n_gene, rng);
    case ModelKind::kTransE:
      return std::make_unique<TransEModel>(cfg, n_chem, n_gene, rng);
  }
  throw ConfigError("unknown model kind");
}

// Forward-only probabilities, scored in chunks of `chunk` triplets.
inline std::vector<double> predict(const LinkModel& model, std::span<const Triplet> ts, std::size_t chunk = 8192) {
  std::vector<double> out;
  out.reserve(ts.size());
  if (ts.empty()) return out;
  Tape tape;
  std::vector<Var> p;
  for (const Tensor& t : model.params().values()) p.push_back(tape.constant(t));
  Var states = model.node_states(tape, p);
  chunk = std::max<std::size_t>(chunk, 1);
  for (std::size_t start = 0; start < ts.size(); start += chunk) {
    auto part = ts.subspan(start, std::min(chunk, ts.size() - start));
    Var z = model.logits(p, states, part);
    for (double v : z.value().values()) out.push_back(stable_sigmoid(v));
  }
  return out;
}

}  // namespace signet
