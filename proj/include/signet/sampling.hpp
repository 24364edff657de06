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
#include <span>
#include <vector>

#include "signet/error.hpp"
#include "signet/graph.hpp"
#include "signet/random.hpp"

namespace signet {

inline constexpr int kMaxCorruptionAttempts = 100;

struct LabeledBatch {
  std::vector<Triplet> triplets;
  std::vector<double> labels;
  // Corruption slots where every attempt hit a true edge.
  std::size_t collisions = 0;

  std::size_t size() const { return triplets.size(); }
};

// Replaces the head or the tail (probability 1/2 each) with a uniformly drawn
// node of the same kind, rejecting candidates that are true edges of `truth`.
inline Triplet corrupt(const Triplet& t, const HeteroGraph& truth, Rng& rng, bool* collided) {
  Triplet candidate = t;
  for (int attempt = 0; attempt < kMaxCorruptionAttempts; ++attempt) {
    candidate = t;
    if (rng() & 1) {
      candidate.head = uniform_index(rng, static_cast<std::uint32_t>(truth.num_chemicals()));
    } else {
      candidate.tail = uniform_index(rng, static_cast<std::uint32_t>(truth.num_genes()));
    }
    if (!truth.has_edge(candidate)) {
      *collided = false;
      return candidate;
    }
  }
  *collided = true;
  return candidate;
}

// Emits each positive (label 1) followed by its `n_per_positive` corruptions
// (label 0).
inline LabeledBatch sample_negatives(std::span<const Triplet> batch, const HeteroGraph& truth,
                                     int n_per_positive, Rng& rng) {
  if (n_per_positive < 1) throw PreconditionError("n_per_positive must be >= 1");
  LabeledBatch out;
  out.triplets.reserve(batch.size() * (1 + n_per_positive));
  out.labels.reserve(out.triplets.capacity());
  for (const Triplet& pos : batch) {
    out.triplets.push_back(pos);
    out.labels.push_back(1.0);
    for (int k = 0; k < n_per_positive; ++k) {
      bool collided = false;
      out.triplets.push_back(corrupt(pos, truth, rng, &collided));
      out.labels.push_back(0.0);
      out.collisions += collided ? 1 : 0;
    }
  }
  return out;
}

enum class ConstraintKind : std::uint8_t { kMustLink, kCannotLink };

// Must-Link / Cannot-Link pair: `anchor` carries the true label, `probe`
// the relation whose score is constrained on the same (head, tail).
struct ConstraintPair {
  ConstraintKind kind = ConstraintKind::kMustLink;
  Triplet anchor;
  Triplet probe;
};

enum class ConstraintMode : std::uint8_t { kWithCannotLink, kWithoutCannotLink };

inline std::vector<ConstraintPair> build_constraint_pairs(std::span<const Triplet> batch,
                                                          ConstraintMode mode) {
  std::vector<ConstraintPair> pairs;
  for (const Triplet& t : batch) {
    if (!is_polar(t.relation)) continue;
    pairs.push_back({ConstraintKind::kMustLink, t, t});
    if (mode == ConstraintMode::kWithCannotLink) {
      Triplet probe = t;
      probe.relation = *opposite(t.relation);
      pairs.push_back({ConstraintKind::kCannotLink, t, probe});
    }
  }
  return pairs;
}

}  // namespace signet
