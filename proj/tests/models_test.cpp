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

#include "fixtures.hpp"
#include "signet/metrics.hpp"
#include "signet/split.hpp"
#include "signet/synthetic.hpp"

using namespace signet;

namespace {

std::unique_ptr<LinkModel> prepared(ModelKind kind, const HeteroGraph& g, std::uint64_t seed = 1) {
  auto m = make_model(fixtures::small_config(kind, false).model_config(), g.num_chemicals(), g.num_genes(), seed);
  m->prepare(g);
  return m;
}

}  // namespace

TEST(TransE, ExactTranslationScoresMargin) {
  auto g = fixtures::six_node_graph();
  auto m = prepared(ModelKind::kTransE, g);
  ParamStore& p = m->params();
  Tensor& ent = p[p.index("transe.entity")];
  const Tensor& rel = p[p.index("transe.relation")];
  // gene 2 (global 5) := chem 1 + relation Binding
  for (std::size_t k = 0; k < ent.cols(); ++k) ent.at(5, k) = ent.at(1, k) + rel.at(index_of(RelationType::kBinding), k);
  std::vector<Triplet> t{{1, RelationType::kBinding, 2}};
  EXPECT_NEAR(predict(*m, t)[0], 1 / (1 + std::exp(-2.0)), 1e-15);
}

TEST(DistMult, ZeroRelationGivesHalf) {
  auto g = fixtures::six_node_graph();
  for (ModelKind kind : {ModelKind::kRgcn, ModelKind::kGraphSage}) {
    auto m = prepared(kind, g);
    ParamStore& p = m->params();
    p[p.index(kind == ModelKind::kRgcn ? "rgcn.relation" : "sage.relation")].fill(0.0);
    auto probs = predict(*m, g.all_edges());
    for (double v : probs) EXPECT_EQ(v, 0.5);
  }
}

TEST(GraphSage, IsolatedNodeUsesSelfOnly) {
  GraphBuilder b(2, 2);
  b.add_edge({0, RelationType::kIncrease, 0});
  auto g = std::move(b).build();
  auto m = prepared(ModelKind::kGraphSage, g);
  const ParamStore& p = m->params();
  Tape t;
  auto vars = p.bind(t);
  Var states = m->node_states(t, vars);
  const Tensor& x = p[p.index("sage.embedding")];
  const Tensor& s = p[p.index("sage.self")];
  // chemical 1 has no edges
  for (std::size_t o = 0; o < s.cols(); ++o) {
    double v = 0;
    for (std::size_t k = 0; k < s.rows(); ++k) v += x.at(1, k) * s.at(k, o);
    EXPECT_NEAR(states.value().at(1, o), std::max(v, 0.0), 1e-15);
  }
}

TEST(GraphSage, SampleCappedAndDeterministic) {
  GraphBuilder b(1, 8);
  for (std::uint32_t g = 0; g < 8; ++g) b.add_edge({0, RelationType::kBinding, g});
  auto g = std::move(b).build();
  auto m = prepared(ModelKind::kGraphSage, g);  // sample size 2
  auto* sage = dynamic_cast<GraphSageModel*>(m.get());
  sage->resample(42);
  const SparseRows first = sage->sample();
  EXPECT_EQ(first.row_ptr[1] - first.row_ptr[0], 2u);
  sage->resample(42);
  EXPECT_EQ(sage->sample().col, first.col);
}

TEST(Models, UnknownNameListsChoices) {
  try {
    parse_model("bionet");
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("rgcntd, rgcn, graphsage, transe"), std::string::npos);
  }
}

TEST(Models, SubgraphTogglesOnlyForRgcntd) {
  auto cfg = fixtures::small_config(ModelKind::kTransE, false);
  cfg.use_chem_subgraph = true;
  EXPECT_THROW(make_model(cfg.model_config(), 3, 3, 1), ConfigError);
}

TEST(Losses, ConstraintZeroWhenDisabled) {
  auto g = fixtures::six_node_graph();
  for (ModelKind kind : kAllModels) {
    auto lp = fixtures::loss_problem(g, fixtures::small_config(kind, false), 3);
    lp.pairs = build_constraint_pairs(g.all_edges(), ConstraintMode::kWithCannotLink);
    Tape t;
    auto p = lp.model->params().bind(t);
    auto loss = batch_loss(*lp.model, p, lp.model->node_states(t, p), lp.batch, lp.pairs, lp.config);
    EXPECT_EQ(loss.constraint.value().item(), 0.0);
    EXPECT_EQ(loss.total.value().item(), loss.supervised.value().item());
  }
}

TEST(Losses, GradCheckEveryModel) {
  auto g = fixtures::six_node_graph();
  for (ModelKind kind : kAllModels) {
    for (bool cl : {false, true}) {
      auto lp = fixtures::loss_problem(g, fixtures::small_config(kind, cl), 5);
      auto report = grad_check(lp.function(), lp.theta());
      EXPECT_LT(report.max_rel_error, 1e-4) << to_string(kind) << " cl=" << cl << " param "
                                            << lp.model->params().names()[report.param];
    }
  }
}

TEST(Losses, RgcntdWithSubgraphsGradCheck) {
  auto g = fixtures::six_node_graph();
  auto cfg = fixtures::small_config(ModelKind::kRgcntd, true);
  cfg.use_chem_subgraph = cfg.use_gene_subgraph = true;
  auto lp = fixtures::loss_problem(g, cfg, 6);
  EXPECT_LT(grad_check(lp.function(), lp.theta()).max_rel_error, 1e-4);
}

// Baselines can fit their own training edges.
TEST(Baselines, FitTrainingEdges) {
  SyntheticParams sp;
  sp.seed = 1;
  auto syn = generate_synthetic(sp);
  auto split = split_edges(syn.graph, {}, 1);
  split.validation = split.train;
  for (ModelKind kind : {ModelKind::kRgcn, ModelKind::kGraphSage, ModelKind::kTransE}) {
    TrainConfig cfg;
    cfg.model = kind;
    cfg.epochs = 200;
    cfg.patience = 200;
    cfg.regularization = 0;
    cfg.seed = 1;
    auto tm = train_model(syn.graph, split, cfg);
    Rng rng(9);
    auto batch = sample_negatives(split.train, syn.graph, 1, rng);
    auto probs = predict(*tm.model, batch.triplets);
    std::vector<int> y(batch.labels.begin(), batch.labels.end());
    EXPECT_GE(auroc(probs, y), 0.80) << to_string(kind);
  }
}

TEST(Baselines, RerunsIdentical) {
  auto g = fixtures::six_node_graph();
  EdgeSplit split;
  split.train = g.all_edges();
  for (ModelKind kind : kAllModels) {
    auto cfg = fixtures::small_config(kind, true);
    cfg.epochs = 5;
    auto a = train_model(g, split, cfg);
    auto b = train_model(g, split, cfg);
    EXPECT_TRUE(a.result.state.params == b.result.state.params) << to_string(kind);
  }
}
