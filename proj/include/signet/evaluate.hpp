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
#include <limits>
#include <map>
#include <string>
#include <vector>

#include "signet/config.hpp"
#include "signet/metrics.hpp"
#include "signet/models.hpp"
#include "signet/random.hpp"
#include "signet/sampling.hpp"
#include "signet/split.hpp"
#include "signet/training.hpp"

namespace signet {

struct PredictionRecord {
  Triplet triplet;
  int label = 0;
  double score = 0;
};

// One held-out Increase/Decrease pair scored under both polar relations.
struct PolarPrediction {
  std::uint32_t chemical = 0;
  std::uint32_t gene = 0;
  PolarRecord record;
};

struct EvalReport {
  double macro_auroc = std::numeric_limits<double>::quiet_NaN();
  double micro_auroc = std::numeric_limits<double>::quiet_NaN();
  double macro_auprc = std::numeric_limits<double>::quiet_NaN();
  double micro_auprc = std::numeric_limits<double>::quiet_NaN();
  double ap_at_k = std::numeric_limits<double>::quiet_NaN();
  double auc_polarity = std::numeric_limits<double>::quiet_NaN();
  double cp_at_k = std::numeric_limits<double>::quiet_NaN();
  int ap_k = 0;
  int cp_k = 0;
  bool ap_clamped = false;
  bool cp_clamped = false;
  std::vector<std::string> notes;
  std::vector<PredictionRecord> records;
  std::vector<PolarPrediction> polar;

  // Headline metrics in report order.
  std::vector<std::pair<std::string, double>> metrics() const {
    return {{"MACRO_AUROC", macro_auroc},
            {"MICRO_AUROC", micro_auroc},
            {"MACRO_AUPRC", macro_auprc},
            {"MICRO_AUPRC", micro_auprc},
            {"AP@" + std::to_string(ap_k), ap_at_k},
            {"AUC_polarity", auc_polarity},
            {"CP@" + std::to_string(cp_k), cp_at_k}};
  }
};

// Scores the test positives against one filtered corruption each and the
// polar test pairs under both signed relations. `model` must already be
// prepared on the message graph.
inline EvalReport evaluate(const LinkModel& model, const HeteroGraph& graph, const EdgeSplit& split,
                           const TrainConfig& cfg) {
  EvalReport rep;
  rep.ap_k = cfg.ap_k;
  rep.cp_k = cfg.cp_k;
  if (split.test.empty()) throw UndefinedMetricError("test split is empty");

  Rng rng(derive_seed(cfg.seed, streams::kEvalNegatives));
  const LabeledBatch batch = sample_negatives(split.test, graph, 1, rng);
  const std::vector<double> scores = predict(model, batch.triplets, cfg.test_batch_size);

  std::map<RelationType, RelationRecords> by_relation;
  rep.records.reserve(batch.size());
  for (std::size_t i = 0; i < batch.size(); ++i) {
    const int y = batch.labels[i] > 0.5 ? 1 : 0;
    rep.records.push_back({batch.triplets[i], y, scores[i]});
    auto& r = by_relation[batch.triplets[i].relation];
    r.scores.push_back(scores[i]);
    r.labels.push_back(y);
  }
  const MacroMicro mm = macro_micro(by_relation);
  for (RelationType r : mm.excluded) rep.notes.push_back("relation " + std::string(to_string(r)) + " excluded from macro: single class");
  rep.macro_auroc = mm.macro_auroc;
  rep.micro_auroc = mm.micro_auroc;
  rep.macro_auprc = mm.macro_auprc;
  rep.micro_auprc = mm.micro_auprc;

  std::vector<int> labels(scores.size());
  for (std::size_t i = 0; i < labels.size(); ++i) labels[i] = rep.records[i].label;
  const AtK ap = average_precision_at_k(scores, labels, static_cast<std::size_t>(cfg.ap_k));
  rep.ap_at_k = ap.value;
  rep.ap_clamped = ap.clamped;
  if (ap.clamped) rep.notes.push_back("AP@k clamped to " + std::to_string(ap.used) + " records");

  std::vector<Triplet> probes;
  for (const Triplet& t : split.test) {
    if (!is_polar(t.relation)) continue;
    PolarPrediction p;
    p.chemical = t.head;
    p.gene = t.tail;
    p.record.truth = polarity(t.relation);
    rep.polar.push_back(p);
    probes.push_back({t.head, RelationType::kIncrease, t.tail});
    probes.push_back({t.head, RelationType::kDecrease, t.tail});
  }
  if (rep.polar.empty()) {
    rep.notes.push_back("no Increase/Decrease pairs in test split; polarity metrics undefined");
    return rep;
  }
  const std::vector<double> pp = predict(model, probes, cfg.test_batch_size);
  std::vector<PolarRecord> polar(rep.polar.size());
  for (std::size_t i = 0; i < rep.polar.size(); ++i) {
    rep.polar[i].record.p_increase = pp[2 * i];
    rep.polar[i].record.p_decrease = pp[2 * i + 1];
    polar[i] = rep.polar[i].record;
  }
  rep.auc_polarity = auc_polarity(polar, cfg.auc_polarity_mode == PolarityMode::kAccuracy);
  const AtK cp = cp_at_k(polar, static_cast<std::size_t>(cfg.cp_k));
  rep.cp_at_k = cp.value;
  rep.cp_clamped = cp.clamped;
  if (cp.clamped) rep.notes.push_back("CP@k clamped to " + std::to_string(cp.used) + " records");
  return rep;
}

// Convenience: restore a saved state and evaluate it.
inline EvalReport evaluate(const ModelState& state, const HeteroGraph& graph, const EdgeSplit& split) {
  auto model = restore_model(state, graph, split);
  return evaluate(*model, graph, split, state.config);
}

}  // namespace signet
