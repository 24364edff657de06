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

#include <chrono>
#include <cmath>
#include <fstream>
#include <limits>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "signet/adam.hpp"
#include "signet/config.hpp"
#include "signet/error.hpp"
#include "signet/graph.hpp"
#include "signet/models.hpp"
#include "signet/ops.hpp"
#include "signet/random.hpp"
#include "signet/sampling.hpp"
#include "signet/split.hpp"

namespace signet {

// RNG stream tags, combined with the run seed through derive_seed().
namespace streams {
inline constexpr std::uint64_t kShuffle = 1000;
inline constexpr std::uint64_t kTrainNegatives = 2;
inline constexpr std::uint64_t kValidationNegatives = 3;
inline constexpr std::uint64_t kEvalNegatives = 4;
inline constexpr std::uint64_t kNeighborSample = 5000;
inline constexpr std::uint64_t kEvalNeighborSample = 7;
}  // namespace streams

// lambda * sum of squared entries over all parameters.
inline Var l2_penalty(std::span<const Var> params, double lambda) {
  Tape* tape = params.front().tape;
  Var total = tape->constant(Tensor::scalar(0.0));
  if (lambda == 0) return total;
  for (Var p : params) total = add(total, sum_squares(p));
  return scale(total, lambda);
}

// Mean cross-entropy over the batch plus lambda * ||theta||^2. Takes raw
// logits; the fused form is the stable path.
inline Var supervised_loss(Var logits, std::vector<double> labels, std::span<const Var> params, double lambda) {
  Var ce = bce_with_logits(logits, std::move(labels));
  if (lambda == 0 || params.empty()) return ce;
  return add(ce, l2_penalty(params, lambda));
}

// Must-Link / Cannot-Link penalty on probe probabilities `scores` (one per
// pair, in pair order): (1 - S)^2 for Must-Link, S^2 for Cannot-Link.
inline Var constraint_loss(Var scores, std::span<const ConstraintPair> pairs,
                           ConstraintReduction reduction = ConstraintReduction::kMean) {
  Tape* tape = scores.tape;
  if (pairs.empty()) return tape->constant(Tensor::scalar(0.0));
  if (scores.value().size() != pairs.size()) throw ShapeError("constraint_loss: one score per pair required");
  // target 1 for Must-Link, 0 for Cannot-Link: residual = S - target.
  Tensor target(Shape{pairs.size()});
  for (std::size_t i = 0; i < pairs.size(); ++i) target[i] = pairs[i].kind == ConstraintKind::kMustLink ? 1.0 : 0.0;
  Var residual = sub(scores, tape->constant(std::move(target)));
  Var total = sum(square(residual));
  return reduction == ConstraintReduction::kMean ? scale(total, 1.0 / static_cast<double>(pairs.size())) : total;
}

// Constraint loss evaluated through a model's probe scores.
inline Var constraint_loss(const LinkModel& model, std::span<const Var> params, Var states,
                           std::span<const ConstraintPair> pairs, ConstraintReduction reduction) {
  if (pairs.empty()) return states.tape->constant(Tensor::scalar(0.0));
  std::vector<Triplet> probes;
  probes.reserve(pairs.size());
  for (const ConstraintPair& p : pairs) probes.push_back(p.probe);
  return constraint_loss(sigmoid(model.logits(params, states, probes)), pairs, reduction);
}

struct BatchLoss {
  Var total;
  Var supervised;
  Var constraint;
};

// Full objective for one batch: supervised + cl_weight * constraint.
inline BatchLoss batch_loss(const LinkModel& model, std::span<const Var> params, Var states,
                            const LabeledBatch& batch, std::span<const ConstraintPair> pairs,
                            const TrainConfig& cfg) {
  Var logits = model.logits(params, states, batch.triplets);
  Var sup = supervised_loss(logits, batch.labels, params, cfg.regularization);
  Var con = cfg.cl_enabled ? constraint_loss(model, params, states, pairs, cfg.cl_reduction)
                           : states.tape->constant(Tensor::scalar(0.0));
  Var total = cfg.cl_enabled && cfg.cl_weight != 0 ? add(sup, scale(con, cfg.cl_weight)) : sup;
  return {total, sup, con};
}

struct EpochRecord {
  int epoch = 0;
  double train_loss = 0;
  double constraint_loss = 0;
  double validation_loss = 0;
  double seconds = 0;
};

struct TrainLog {
  std::vector<EpochRecord> epochs;
  int best_epoch = 0;
  int stopped_epoch = 0;
  std::size_t negative_collisions = 0;
  std::vector<std::string> warnings;

  // CSV `epoch,split,loss,seconds`, three rows per epoch (train, constraint,
  // validation).
  void write_csv(std::ostream& os) const {
    os << "epoch,split,loss,seconds\n";
    for (const auto& e : epochs) {
      const std::string sec = detail::format_double(e.seconds);
      os << e.epoch << ",train," << detail::format_double(e.train_loss) << ',' << sec << '\n';
      os << e.epoch << ",constraint," << detail::format_double(e.constraint_loss) << ',' << sec << '\n';
      os << e.epoch << ",validation," << detail::format_double(e.validation_loss) << ',' << sec << '\n';
    }
  }
};

// Parameters, optimizer state and bookkeeping of a trained (or training)
// model.
struct ModelState {
  TrainConfig config;
  ParamStore params;
  AdamState optimizer;
  int epoch = 0;
  int best_epoch = 0;
  double best_validation_loss = std::numeric_limits<double>::infinity();
};

// Tracks the best validation loss and decides when to stop.
class EarlyStopper {
 public:
  explicit EarlyStopper(int patience) : patience_(patience) {}

  // Returns true when `loss` is a new best (strictly lower).
  bool observe(int epoch, double loss) {
    if (loss < best_) {
      best_ = loss;
      best_epoch_ = epoch;
      bad_ = 0;
      return true;
    }
    ++bad_;
    return false;
  }
  bool should_stop() const { return bad_ >= patience_; }
  double best() const { return best_; }
  int best_epoch() const { return best_epoch_; }

 private:
  int patience_;
  int bad_ = 0;
  int best_epoch_ = 0;
  double best_ = std::numeric_limits<double>::infinity();
};

struct TrainResult {
  ModelState state;
  TrainLog log;
};

inline HeteroGraph message_graph(const HeteroGraph& graph, const EdgeSplit& split) {
  return graph.with_relation_edges(split.train);
}

// Supervised loss of the current parameters on a fixed labeled batch.
inline double forward_supervised_loss(const LinkModel& model, const LabeledBatch& batch, double lambda) {
  Tape tape;
  std::vector<Var> p;
  for (const Tensor& t : model.params().values()) p.push_back(tape.constant(t));
  Var states = model.node_states(tape, p);
  return supervised_loss(model.logits(p, states, batch.triplets), batch.labels, p, lambda).value().item();
}

// Joint training loop with Adam, validation-loss early stopping and best
// snapshot restore. `model` ends holding the best parameters.
inline TrainResult train(LinkModel& model, const HeteroGraph& graph, const EdgeSplit& split, const TrainConfig& cfg,
                         std::ostream* progress = nullptr) {
  validate_or_throw(cfg);
  if (split.train.empty()) throw PreconditionError("training split is empty");
  const std::uint64_t seed = cfg.seed;
  TrainResult result;
  TrainLog& log = result.log;

  Rng val_rng(derive_seed(seed, streams::kValidationNegatives));
  LabeledBatch val_batch;
  if (!split.validation.empty()) {
    val_batch = sample_negatives(split.validation, graph, cfg.n_negatives, val_rng);
  } else {
    log.warnings.push_back("validation split is empty; early stopping monitors the training edges");
    val_batch = sample_negatives(split.train, graph, cfg.n_negatives, val_rng);
  }
  log.negative_collisions += val_batch.collisions;

  AdamState opt;
  opt.options.learning_rate = cfg.learning_rate;
  opt.options.clip_norm = cfg.grad_norm;

  EarlyStopper stopper(cfg.patience);
  ParamStore best_params = model.params();
  AdamState best_opt = opt;
  Rng neg_rng(derive_seed(seed, streams::kTrainNegatives));
  const auto start = std::chrono::steady_clock::now();
  const ConstraintMode mode = ConstraintMode::kWithCannotLink;

  const HeteroGraph full_messages = message_graph(graph, split);
  model.prepare(full_messages);
  const std::size_t n_train = split.train.size();
  const std::size_t folds = cfg.message_folds > 1 ? std::min<std::size_t>(cfg.message_folds, n_train) : 1;

  int epoch = 1;
  for (; epoch <= cfg.epochs; ++epoch) {
    std::vector<Triplet> order = split.train;
    Rng shuffle_rng(derive_seed(seed, streams::kShuffle + static_cast<std::uint64_t>(epoch)));
    shuffle(order, shuffle_rng);
    const std::uint64_t sample_seed = derive_seed(seed, streams::kNeighborSample + static_cast<std::uint64_t>(epoch));
    if (folds == 1) model.resample(sample_seed);

    double loss_sum = 0, con_sum = 0;
    std::size_t batches = 0;
    auto step = [&](std::span<const Triplet> positives) {
      try {
        LabeledBatch batch = sample_negatives(positives, graph, cfg.n_negatives, neg_rng);
        log.negative_collisions += batch.collisions;
        std::vector<ConstraintPair> pairs;
        if (cfg.cl_enabled) pairs = build_constraint_pairs(positives, mode);

        Tape tape;
        std::vector<Var> p = model.params().bind(tape);
        Var states = model.node_states(tape, p);
        BatchLoss loss = batch_loss(model, p, states, batch, pairs, cfg);
        const double total = loss.total.value().item();
        if (!std::isfinite(total)) throw NumericError("non-finite loss");
        tape.backward(loss.total);
        std::vector<Tensor> grads;
        grads.reserve(p.size());
        for (Var v : p) grads.push_back(tape.grad(v));
        adam_step(model.params().values(), grads, opt, model.params().names());
        loss_sum += total;
        con_sum += loss.constraint.value().item();
        ++batches;
      } catch (const NumericError& e) {
        throw NumericError("epoch " + std::to_string(epoch) + " batch " + std::to_string(batches) + ": " + e.what());
      }
    };

    for (std::size_t f = 0; f < folds; ++f) {
      const auto f0 = static_cast<std::ptrdiff_t>(f * n_train / folds);
      const auto f1 = static_cast<std::ptrdiff_t>((f + 1) * n_train / folds);
      if (folds > 1) {
        // The fold being supervised carries no messages.
        std::vector<Triplet> rest(order.begin(), order.begin() + f0);
        rest.insert(rest.end(), order.begin() + f1, order.end());
        model.prepare(graph.with_relation_edges(rest));
        model.resample(derive_seed(sample_seed, f));
      }
      for (std::ptrdiff_t b0 = f0; b0 < f1; b0 += cfg.batch_size) {
        const std::ptrdiff_t b1 = std::min<std::ptrdiff_t>(f1, b0 + cfg.batch_size);
        step(std::span<const Triplet>(order.data() + b0, static_cast<std::size_t>(b1 - b0)));
      }
    }

    if (folds > 1) model.prepare(full_messages);
    model.resample(derive_seed(seed, streams::kEvalNeighborSample));
    EpochRecord rec;
    rec.epoch = epoch;
    rec.train_loss = loss_sum / static_cast<double>(batches);
    rec.constraint_loss = con_sum / static_cast<double>(batches);
    rec.validation_loss = forward_supervised_loss(model, val_batch, cfg.regularization);
    rec.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (!std::isfinite(rec.validation_loss)) {
      throw NumericError("epoch " + std::to_string(epoch) + ": non-finite validation loss");
    }
    log.epochs.push_back(rec);
    if (progress && (epoch % cfg.print_step == 0 || epoch == 1)) {
      *progress << "epoch " << epoch << " train " << rec.train_loss << " constraint " << rec.constraint_loss
                << " validation " << rec.validation_loss << '\n';
    }

    if (stopper.observe(epoch, rec.validation_loss)) {
      best_params = model.params();
      best_opt = opt;
    }
    if (stopper.should_stop()) break;
  }
  log.stopped_epoch = std::min(epoch, cfg.epochs);
  log.best_epoch = stopper.best_epoch();

  model.params() = best_params;
  model.resample(derive_seed(seed, streams::kEvalNeighborSample));
  result.state.config = cfg;
  result.state.params = best_params;
  result.state.optimizer = best_opt;
  result.state.epoch = log.stopped_epoch;
  result.state.best_epoch = log.best_epoch;
  result.state.best_validation_loss = stopper.best();
  return result;
}

// Builds the model described by `cfg`, trains it and returns both.
struct TrainedModel {
  std::unique_ptr<LinkModel> model;
  TrainResult result;
};

inline TrainedModel train_model(const HeteroGraph& graph, const EdgeSplit& split, const TrainConfig& cfg,
                                std::ostream* progress = nullptr) {
  validate_or_throw(cfg);
  TrainedModel out;
  out.model = make_model(cfg.model_config(), graph.num_chemicals(), graph.num_genes(), cfg.seed);
  out.result = train(*out.model, graph, split, cfg, progress);
  return out;
}

// Rebuilds a model from a saved state, ready for scoring on `graph`.
inline std::unique_ptr<LinkModel> restore_model(const ModelState& state, const HeteroGraph& graph,
                                                const EdgeSplit& split) {
  auto model = make_model(state.config.model_config(), graph.num_chemicals(), graph.num_genes(), state.config.seed);
  const ParamStore& expected = model->params();
  if (expected.size() != state.params.size()) {
    throw ConfigError("checkpoint holds " + std::to_string(state.params.size()) + " tensors, model expects " +
                      std::to_string(expected.size()));
  }
  for (std::size_t i = 0; i < expected.size(); ++i) {
    if (expected.names()[i] != state.params.names()[i] || expected[i].shape() != state.params[i].shape()) {
      throw ConfigError("shape manifest mismatch at '" + state.params.names()[i] + "' " +
                        shape_string(state.params[i].shape()) + " vs expected '" + expected.names()[i] + "' " +
                        shape_string(expected[i].shape()));
    }
  }
  model->params() = state.params;
  model->prepare(message_graph(graph, split));
  model->resample(derive_seed(state.config.seed, streams::kEvalNeighborSample));
  return model;
}

}  // namespace signet
