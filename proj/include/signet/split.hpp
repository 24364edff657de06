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
#include <string>
#include <vector>

#include "signet/error.hpp"
#include "signet/graph.hpp"
#include "signet/random.hpp"

namespace signet {

struct SplitRatios {
  double train = 0.8;
  double validation = 0.1;
  double test = 0.1;
};

struct EdgeSplit {
  std::vector<Triplet> train;
  std::vector<Triplet> validation;
  std::vector<Triplet> test;
  std::uint64_t seed = 0;
  SplitRatios ratios;
  std::vector<std::string> warnings;
};

// Stratified per relation: each relation's edges are shuffled with the split
// seed and cut by the ratios. Relations with fewer than 3 edges go to train.
inline EdgeSplit split_edges(const HeteroGraph& graph, SplitRatios ratios, std::uint64_t seed) {
  if (!(ratios.train > 0 && ratios.validation > 0 && ratios.test > 0) ||
      std::abs(ratios.train + ratios.validation + ratios.test - 1.0) > 1e-9) {
    throw PreconditionError("split ratios must be positive and sum to 1");
  }
  EdgeSplit split;
  split.seed = seed;
  split.ratios = ratios;
  Rng rng(seed);
  for (RelationType r : kAllRelations) {
    std::vector<Triplet> edges = graph.edges(r);
    const std::size_t n = edges.size();
    if (n == 0) continue;
    if (n < 3) {
      split.warnings.push_back("relation '" + std::string(to_string(r)) + "' has " +
                               std::to_string(n) + " edge(s); placed wholly in train");
      split.train.insert(split.train.end(), edges.begin(), edges.end());
      continue;
    }
    shuffle(edges, rng);
    auto n_val = static_cast<std::size_t>(std::llround(static_cast<double>(n) * ratios.validation));
    auto n_test = static_cast<std::size_t>(std::llround(static_cast<double>(n) * ratios.test));
    if (n_val + n_test >= n) n_val = n_test = 0;
    const std::size_t n_train = n - n_val - n_test;
    split.train.insert(split.train.end(), edges.begin(), edges.begin() + n_train);
    split.validation.insert(split.validation.end(), edges.begin() + n_train,
                            edges.begin() + n_train + n_val);
    split.test.insert(split.test.end(), edges.begin() + n_train + n_val, edges.end());
  }
  return split;
}

}  // namespace signet
