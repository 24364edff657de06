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
#include <map>
#include <numbers>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "signet/error.hpp"
#include "signet/graph.hpp"

namespace signet {

namespace detail {

inline void require_two_classes(std::span<const double> scores, std::span<const int> labels, const char* metric) {
  if (scores.size() != labels.size()) throw ShapeError(std::string(metric) + ": scores/labels length mismatch");
  std::size_t pos = 0;
  for (int y : labels) pos += y != 0;
  if (pos == 0 || pos == labels.size()) {
    throw UndefinedMetricError(std::string(metric) + " needs at least one positive and one negative label");
  }
}

// Indices sorted by descending score; ties keep input order.
inline std::vector<std::size_t> rank_order(std::span<const double> scores) {
  std::vector<std::size_t> idx(scores.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
  return idx;
}

}  // namespace detail

// Mann-Whitney rank statistic with tied scores sharing their average rank.
inline double auroc(std::span<const double> scores, std::span<const int> labels) {
  detail::require_two_classes(scores, labels, "auroc");
  const std::size_t n = scores.size();
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
  double pos_rank_sum = 0;
  std::size_t n_pos = 0;
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j < n && scores[idx[j]] == scores[idx[i]]) ++j;
    const double avg_rank = 0.5 * static_cast<double>(i + 1 + j);  // mean of ranks i+1..j
    for (std::size_t k = i; k < j; ++k) {
      if (labels[idx[k]]) {
        pos_rank_sum += avg_rank;
        ++n_pos;
      }
    }
    i = j;
  }
  const double p = static_cast<double>(n_pos);
  const double q = static_cast<double>(n - n_pos);
  return (pos_rank_sum - p * (p + 1) / 2) / (p * q);
}

// Average precision: sum over score thresholds of (R_t - R_{t-1}) * P_t,
// tied scores entering the ranking together.
inline double auprc(std::span<const double> scores, std::span<const int> labels) {
  detail::require_two_classes(scores, labels, "auprc");
  const auto idx = detail::rank_order(scores);
  double total_pos = 0;
  for (int y : labels) total_pos += y != 0;
  double tp = 0, fp = 0, prev_recall = 0, ap = 0;
  for (std::size_t i = 0; i < idx.size();) {
    std::size_t j = i;
    while (j < idx.size() && scores[idx[j]] == scores[idx[i]]) {
      (labels[idx[j]] ? tp : fp) += 1;
      ++j;
    }
    const double recall = tp / total_pos;
    ap += (recall - prev_recall) * (tp / (tp + fp));
    prev_recall = recall;
    i = j;
  }
  return ap;
}

struct RelationRecords {
  std::vector<double> scores;
  std::vector<int> labels;
};

struct MacroMicro {
  double macro_auroc = 0;
  double micro_auroc = 0;
  double macro_auprc = 0;
  double micro_auprc = 0;
  // Relations left out of the macro mean because they hold a single class.
  std::vector<RelationType> excluded;
};

inline bool has_two_classes(const RelationRecords& r) {
  bool pos = false, neg = false;
  for (int y : r.labels) (y ? pos : neg) = true;
  return pos && neg;
}

// Macro: unweighted mean over relations with two classes. Micro: all records
// pooled.
inline MacroMicro macro_micro(const std::map<RelationType, RelationRecords>& by_relation) {
  MacroMicro out;
  RelationRecords pooled;
  std::size_t valid = 0;
  for (const auto& [rel, recs] : by_relation) {
    pooled.scores.insert(pooled.scores.end(), recs.scores.begin(), recs.scores.end());
    pooled.labels.insert(pooled.labels.end(), recs.labels.begin(), recs.labels.end());
    if (!has_two_classes(recs)) {
      out.excluded.push_back(rel);
      continue;
    }
    out.macro_auroc += auroc(recs.scores, recs.labels);
    out.macro_auprc += auprc(recs.scores, recs.labels);
    ++valid;
  }
  if (valid == 0) throw UndefinedMetricError("macro metrics: no relation has both positive and negative records");
  out.macro_auroc /= static_cast<double>(valid);
  out.macro_auprc /= static_cast<double>(valid);
  out.micro_auroc = auroc(pooled.scores, pooled.labels);
  out.micro_auprc = auprc(pooled.scores, pooled.labels);
  return out;
}

struct AtK {
  double value = 0;
  // Number of records actually used (min(k, available)).
  std::size_t used = 0;
  // Set when fewer than k records were available.
  bool clamped = false;
};

// Mean of precision@i over positive positions i among the top k (by score,
// ties in input order). 0 when the top k holds no positive.
inline AtK average_precision_at_k(std::span<const double> scores, std::span<const int> labels, std::size_t k) {
  if (scores.size() != labels.size()) throw ShapeError("ap@k: scores/labels length mismatch");
  if (k == 0) throw PreconditionError("ap@k: k must be >= 1");
  const auto idx = detail::rank_order(scores);
  AtK out;
  out.used = std::min(k, idx.size());
  out.clamped = idx.size() < k;
  double hits = 0, sum = 0;
  for (std::size_t i = 0; i < out.used; ++i) {
    if (labels[idx[i]]) {
      hits += 1;
      sum += hits / static_cast<double>(i + 1);
    }
  }
  out.value = hits > 0 ? sum / hits : 0.0;
  return out;
}

// C = |P_increase - P_decrease|.
inline double polarity_degree(double p_increase, double p_decrease) { return std::abs(p_increase - p_decrease); }

inline constexpr double kTransformScale = 2.0 * std::numbers::pi * std::numbers::pi;

// C' = ln(1 + 2 pi^2 C) / ln(2 pi^2 + 1); maps [0, 1] onto [0, 1] monotonically.
inline double transform_c(double c) {
  if (!(c >= 0.0 && c <= 1.0)) throw DomainError("transform_c: C must lie in [0, 1], got " + std::to_string(c));
  return std::log1p(kTransformScale * c) / std::log1p(kTransformScale);
}

struct PolarRecord {
  double p_increase = 0.5;
  double p_decrease = 0.5;
  // kPositive for a true Increase edge, kNegative for Decrease.
  Polarity truth = Polarity::kPositive;
};

// The larger of the two probabilities must name the true polarity; exact
// ties count as wrong.
inline bool polarity_correct(const PolarRecord& r) {
  return r.truth == Polarity::kPositive ? r.p_increase > r.p_decrease : r.p_decrease > r.p_increase;
}

// Fraction of correct polarity calls among the k records with largest C.
// With fewer than k records the divisor is the record count (clamped).
inline AtK cp_at_k(std::span<const PolarRecord> records, std::size_t k) {
  if (k == 0) throw PreconditionError("cp@k: k must be >= 1");
  std::vector<double> c(records.size());
  for (std::size_t i = 0; i < records.size(); ++i) c[i] = polarity_degree(records[i].p_increase, records[i].p_decrease);
  const auto idx = detail::rank_order(c);
  AtK out;
  out.used = std::min(k, records.size());
  out.clamped = records.size() < k;
  if (out.used == 0) return out;
  double correct = 0;
  for (std::size_t i = 0; i < out.used; ++i) correct += polarity_correct(records[idx[i]]) ? 1 : 0;
  out.value = correct / static_cast<double>(out.used);
  return out;
}

// Signed directional accuracy (N_correct - N_wrong) / N in [-1, 1]; with
// `accuracy_only` the plain fraction correct.
inline double auc_polarity(std::span<const PolarRecord> records, bool accuracy_only = false) {
  if (records.empty()) throw UndefinedMetricError("auc_polarity needs at least one polar record");
  double correct = 0;
  for (const PolarRecord& r : records) correct += polarity_correct(r) ? 1 : 0;
  const double n = static_cast<double>(records.size());
  return accuracy_only ? correct / n : (correct - (n - correct)) / n;
}

// 1-based descending ranks; ties ranked by input order.
inline std::vector<std::size_t> descending_ranks(std::span<const double> values) {
  const auto idx = detail::rank_order(values);
  std::vector<std::size_t> rank(values.size());
  for (std::size_t pos = 0; pos < idx.size(); ++pos) rank[idx[pos]] = pos + 1;
  return rank;
}

}  // namespace signet
