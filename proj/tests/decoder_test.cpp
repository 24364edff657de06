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

#include "signet/decoder.hpp"
#include "signet/random.hpp"

using namespace signet;

namespace {

Tensor random_matrix(std::size_t r, std::size_t c, Rng& rng) {
  Tensor t = Tensor::matrix(r, c);
  for (double& v : t.values()) v = 2 * uniform01(rng) - 1;
  return t;
}

HeteroGraph random_graph(std::size_t nc, std::size_t ng, double density, std::uint64_t seed) {
  Rng rng(seed);
  GraphBuilder b(nc, ng);
  for (std::uint32_t c = 0; c < nc; ++c)
    for (std::uint32_t g = 0; g < ng; ++g)
      for (RelationType r : kAllRelations)
        if (uniform01(rng) < density) b.add_edge({c, r, g});
  return std::move(b).build();
}

}  // namespace

TEST(RgcnRefine, SingleNeighborIdentity) {
  GraphBuilder b(1, 1);
  b.add_edge({0, RelationType::kDecrease, 0});
  auto g = std::move(b).build();
  Tape t;
  Var h = t.constant(Tensor::from_rows({{1, -2}, {3, 4}}));
  std::vector<Var> w(4, t.constant(Tensor::identity(2)));
  Var out = rgcn_refine(h, refine_propagation(g), w, Activation::kIdentity);
  EXPECT_EQ(out.value(), Tensor::from_rows({{3, 4}, {1, -2}}));
}

TEST(RgcnRefine, MatchesNaiveLoop) {
  auto g = random_graph(4, 6, 0.3, 31);
  Rng rng(32);
  Tensor h = random_matrix(10, 3, rng);
  std::vector<Tensor> w;
  for (int r = 0; r < 4; ++r) w.push_back(random_matrix(3, 3, rng));
  Tape t;
  std::vector<Var> wv;
  for (const auto& m : w) wv.push_back(t.constant(m));
  Var out = rgcn_refine(t.constant(h), refine_propagation(g), wv, Activation::kIdentity);
  for (std::uint32_t i = 0; i < 10; ++i) {
    for (std::size_t o = 0; o < 3; ++o) {
      double ref = 0;
      for (std::size_t r = 0; r < 4; ++r) {
        const double deg = g.degree(kAllRelations[r], i);
        for (std::uint32_t j : g.neighbors(kAllRelations[r], i)) {
          for (std::size_t k = 0; k < 3; ++k) ref += h.at(j, k) * w[r].at(k, o) / deg;
        }
      }
      EXPECT_NEAR(out.value().at(i, o), ref, 1e-12);
    }
  }
}

// With as many bases as relations and identity coefficients, W_r is basis r.
TEST(BasisRgcnLayer, DegenerateBasisIsPlainRgcn) {
  ParamStore store;
  Rng rng(3);
  BasisRgcnLayer layer("dec", 3, 3, 4, store, rng);
  store[store.index("dec.coef")] = Tensor::identity(4);
  Tape t;
  auto params = store.bind(t);
  auto w = layer.relation_weights(params);
  for (std::size_t r = 0; r < 4; ++r) {
    EXPECT_EQ(w[r].value(), store[store.index("dec.basis" + std::to_string(r))]);
  }
}

TEST(Dedicom, ClosedFormValues) {
  Tensor ones = Tensor::from_rows({{1, 1, 1, 1}});
  std::vector<double> e(4, 1.0), zero(4, 0.0);
  Tensor mixing = Tensor::matrix(4, 1, 1.0);
  EXPECT_NEAR(dedicom_score(e, e, mixing, ones, 0), 1 / (1 + std::exp(-4.0)), 1e-15);
  EXPECT_NEAR(dedicom_score(e, e, mixing, ones, 0), 0.9820, 1e-4);
  EXPECT_EQ(dedicom_score(e, e, Tensor::matrix(4, 1, 0.0), ones, 2), 0.5);
  EXPECT_EQ(dedicom_score(zero, e, mixing, ones, 1), 0.5);
}

TEST(Dedicom, SymmetricInEndpoints) {
  Rng rng(4);
  Tensor ei = random_matrix(1, 5, rng), ej = random_matrix(1, 5, rng);
  Tensor mixing = random_matrix(4, 3, rng), factors = random_matrix(3, 5, rng);
  for (std::size_t r = 0; r < 4; ++r) {
    EXPECT_EQ(dedicom_score(ei.row(0), ej.row(0), mixing, factors, r),
              dedicom_score(ej.row(0), ei.row(0), mixing, factors, r));
  }
}

TEST(Dedicom, BatchMatchesLoop) {
  Rng rng(5);
  const std::size_t nc = 7, ng = 9, d = 6;
  Tensor states = random_matrix(nc + ng, d, rng);
  Tensor mixing = random_matrix(4, 3, rng), factors = random_matrix(3, d, rng);
  std::vector<Triplet> ts;
  for (int i = 0; i < 200; ++i) {
    ts.push_back({uniform_index(rng, std::uint32_t(nc)), kAllRelations[uniform_index(rng, 4u)],
                  uniform_index(rng, std::uint32_t(ng))});
  }
  Tape t;
  Var s = t.constant(states);
  Var z = dedicom_logits(gather_rows(s, head_nodes(ts)), gather_rows(s, tail_nodes(ts, nc)), t.constant(mixing),
                         t.constant(factors), relation_indices(ts));
  for (std::size_t i = 0; i < ts.size(); ++i) {
    const double ref = dedicom_score(states.row(ts[i].head), states.row(nc + ts[i].tail), mixing, factors,
                                     index_of(ts[i].relation));
    EXPECT_NEAR(stable_sigmoid(z.value()[i]), ref, 1e-12);
  }
}

TEST(Dedicom, EmptyBatch) {
  ParamStore store;
  Rng rng(6);
  DedicomScorer scorer("td", 4, 2, store, rng);
  Tape t;
  auto params = store.bind(t);
  Var states = t.constant(Tensor::matrix(5, 4, 0.1));
  Var z = scorer.logits(params, states, std::span<const Triplet>{}, 2);
  EXPECT_EQ(z.value().size(), 0u);
}
