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

#include <cstdint>
#include <vector>

#include "signet/error.hpp"
#include "signet/graph.hpp"
#include "signet/random.hpp"

namespace signet {

struct SyntheticParams {
  std::size_t n_chem = 50;
  std::size_t n_gene = 50;
  // Probability that a given (chemical, gene) pair carries an edge.
  double density = 0.05;
  // Probability that a sampled pair's relation follows the planted signs.
  double polarity_signal = 0.9;
  // Fraction of sampled pairs that additionally receive a Binding edge.
  double binding_fraction = 0.2;
  // Edge probability for same-sign pairs inside the chemical-chemical and
  // gene-gene subgraphs; opposite-sign pairs use a quarter of it. 0 disables.
  double subgraph_density = 0.0;
  std::uint64_t seed = 0;
};

struct SyntheticGraph {
  HeteroGraph graph;
  // Planted latent signs (+1 / -1), kept for diagnostics.
  std::vector<int> chem_sign;
  std::vector<int> gene_sign;
};

// Planted-polarity generator: the sign of a polar edge between c and g is
// Increase when s_c * s_g = +1 and Decrease otherwise, with probability
// `polarity_signal`; the remaining pairs draw their relation uniformly.
inline SyntheticGraph generate_synthetic(const SyntheticParams& p) {
  if (p.n_chem < 2 || p.n_gene < 2) throw PreconditionError("need at least 2 chemicals and 2 genes");
  if (!(p.density > 0 && p.density <= 1)) throw PreconditionError("density must be in (0, 1]");
  if (!(p.polarity_signal >= 0 && p.polarity_signal <= 1)) {
    throw PreconditionError("polarity_signal must be in [0, 1]");
  }
  if (!(p.binding_fraction >= 0 && p.binding_fraction <= 1) ||
      !(p.subgraph_density >= 0 && p.subgraph_density <= 1)) {
    throw PreconditionError("binding_fraction and subgraph_density must be in [0, 1]");
  }

  Rng rng(p.seed);
  SyntheticGraph out;
  out.chem_sign.resize(p.n_chem);
  out.gene_sign.resize(p.n_gene);
  for (int& s : out.chem_sign) s = (rng() & 1) ? 1 : -1;
  for (int& s : out.gene_sign) s = (rng() & 1) ? 1 : -1;

  GraphBuilder builder(p.n_chem, p.n_gene);
  std::size_t pairs = 0;
  for (std::uint32_t c = 0; c < p.n_chem; ++c) {
    for (std::uint32_t g = 0; g < p.n_gene; ++g) {
      if (uniform01(rng) >= p.density) continue;
      ++pairs;
      RelationType rel;
      if (uniform01(rng) < p.polarity_signal) {
        rel = out.chem_sign[c] * out.gene_sign[g] > 0 ? RelationType::kIncrease
                                                      : RelationType::kDecrease;
      } else {
        rel = kAllRelations[uniform_index(rng, kNumRelations)];
      }
      builder.add_edge({c, rel, g});
      if (uniform01(rng) < p.binding_fraction) builder.add_edge({c, RelationType::kBinding, g});
    }
  }
  if (pairs == 0) throw PreconditionError("density produced no edges; increase density or size");

  if (p.subgraph_density > 0) {
    auto homophilous = [&](Subgraph s, const std::vector<int>& sign) {
      for (std::uint32_t a = 0; a < sign.size(); ++a) {
        for (std::uint32_t b = a + 1; b < sign.size(); ++b) {
          double prob = sign[a] == sign[b] ? p.subgraph_density : 0.25 * p.subgraph_density;
          if (uniform01(rng) < prob) builder.add_subgraph_edge(s, a, b);
        }
      }
    };
    homophilous(Subgraph::kChemical, out.chem_sign);
    homophilous(Subgraph::kGene, out.gene_sign);
  }
  out.graph = std::move(builder).build();
  return out;
}

}  // namespace signet
