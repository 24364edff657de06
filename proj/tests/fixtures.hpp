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

// Small graphs and loss closures shared by the unit and acceptance tests.

#pragma once

#include <memory>
#include <vector>

#include "signet/grad_check.hpp"
#include "signet/models.hpp"
#include "signet/sampling.hpp"
#include "signet/training.hpp"

namespace fixtures {

using namespace signet;

// 3 chemicals x 3 genes with every relation present; both subgraphs carry
// one edge so branch toggles can be exercised.
inline HeteroGraph six_node_graph() {
  GraphBuilder b(3, 3);
  b.add_edge({0, RelationType::kIncrease, 0});
  b.add_edge({0, RelationType::kDecrease, 1});
  b.add_edge({1, RelationType::kIncrease, 1});
  b.add_edge({1, RelationType::kBinding, 2});
  b.add_edge({2, RelationType::kDecrease, 2});
  b.add_edge({2, RelationType::kAffect, 0});
  b.add_edge({0, RelationType::kBinding, 0});
  b.add_subgraph_edge(Subgraph::kChemical, 0, 2);
  b.add_subgraph_edge(Subgraph::kGene, 1, 2);
  return std::move(b).build();
}

inline TrainConfig small_config(ModelKind kind, bool cl) {
  TrainConfig c;
  c.model = kind;
  c.cl_enabled = cl;
  c.hidden_dimensions = {4, 3};
  c.n_bases = 2;
  c.n_factors = 2;
  c.sage_sample_size = 2;
  return c;
}

// Full training objective (supervised + weighted constraint) as a function of
// the model's parameter tensors, on a fixed labeled batch.
struct LossProblem {
  std::unique_ptr<LinkModel> model;
  LabeledBatch batch;
  std::vector<ConstraintPair> pairs;
  TrainConfig config;

  ScalarFn function() const {
    return [this](Tape& tape, std::span<const Var> p) {
      Var states = model->node_states(tape, p);
      return batch_loss(*model, p, states, batch, pairs, config).total;
    };
  }
  std::vector<Tensor> theta() const { return model->params().values(); }
};

inline LossProblem loss_problem(const HeteroGraph& g, const TrainConfig& cfg, std::uint64_t seed) {
  LossProblem lp;
  lp.config = cfg;
  lp.model = make_model(cfg.model_config(), g.num_chemicals(), g.num_genes(), seed);
  lp.model->prepare(g);
  lp.model->resample(seed);
  const auto edges = g.all_edges();
  Rng rng(derive_seed(seed, 77));
  lp.batch = sample_negatives(edges, g, 1, rng);
  if (cfg.cl_enabled) lp.pairs = build_constraint_pairs(edges, ConstraintMode::kWithCannotLink);
  return lp;
}

}  // namespace fixtures
