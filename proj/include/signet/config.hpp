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

#include <charconv>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "signet/error.hpp"
#include "signet/models.hpp"
#include "signet/split.hpp"

namespace signet {

enum class ConstraintReduction : std::uint8_t { kMean, kSum };
enum class PolarityMode : std::uint8_t { kSigned, kAccuracy };

// Every knob of a training / evaluation run. Field names double as config
// file keys and CLI flag names.
struct TrainConfig {
  ModelKind model = ModelKind::kRgcntd;
  int epochs = 50;
  int batch_size = 256;
  std::vector<std::size_t> hidden_dimensions{32, 16};
  double learning_rate = 1e-2;
  double regularization = 1e-2;
  double grad_norm = 1.0;
  bool cl_enabled = false;
  double cl_weight = 1.0;
  ConstraintReduction cl_reduction = ConstraintReduction::kMean;
  int patience = 5;
  std::uint64_t seed = 0;
  bool use_chem_subgraph = false;
  bool use_gene_subgraph = false;
  int n_negatives = 1;
  // Training edges are cut into this many folds per epoch; a fold's edges
  // leave the message graph while they are supervised. <= 1 disables.
  int message_folds = 1;
  int test_batch_size = 8192;
  int print_step = 10;
  int ap_k = 20;
  int cp_k = 500;
  std::size_t n_bases = 4;
  std::size_t n_factors = 4;
  Activation activation = Activation::kRelu;
  Activation refine_activation = Activation::kRelu;
  double transe_margin = 2.0;
  std::size_t sage_sample_size = 10;
  SplitRatios split{};
  PolarityMode auc_polarity_mode = PolarityMode::kSigned;

  ModelConfig model_config() const {
    ModelConfig m;
    m.kind = model;
    m.hidden_dimensions = hidden_dimensions;
    m.activation = activation;
    m.refine_activation = refine_activation;
    m.chem_subgraph = use_chem_subgraph;
    m.gene_subgraph = use_gene_subgraph;
    m.n_bases = n_bases;
    m.n_factors = n_factors;
    m.transe_margin = transe_margin;
    m.sage_sample_size = sage_sample_size;
    return m;
  }
};

namespace detail {

inline std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::string trim(std::string_view s) {
  const char* ws = " \t\r\n";
  auto b = s.find_first_not_of(ws);
  if (b == std::string_view::npos) return {};
  auto e = s.find_last_not_of(ws);
  return std::string(s.substr(b, e - b + 1));
}

template <typename T>
T parse_number(const std::string& key, const std::string& v) {
  T out{};
  if constexpr (std::is_floating_point_v<T>) {
    try {
      std::size_t used = 0;
      out = std::stod(v, &used);
      if (used != v.size()) throw std::invalid_argument(v);
    } catch (const std::exception&) {
      throw ConfigError(key + ": expected a number, got '" + v + "'");
    }
  } else {
    auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc() || ptr != v.data() + v.size()) {
      throw ConfigError(key + ": expected an integer, got '" + v + "'");
    }
  }
  return out;
}

inline bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "on" || v == "true" || v == "1" || v == "yes") return true;
  if (v == "off" || v == "false" || v == "0" || v == "no") return false;
  throw ConfigError(key + ": expected on/off, got '" + v + "'");
}

inline std::vector<std::size_t> parse_dims(const std::string& key, std::string v) {
  std::vector<std::size_t> out;
  for (char& c : v) {
    if (c == '[' || c == ']') c = ' ';
  }
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (item.empty()) continue;
    out.push_back(parse_number<std::size_t>(key, item));
  }
  return out;
}

}  // namespace detail

// Applies one key=value setting. Throws ConfigError on unknown keys or
// unparsable values.
inline void apply_setting(TrainConfig& c, const std::string& key, const std::string& raw) {
  using detail::parse_bool;
  using detail::parse_number;
  const std::string v = detail::trim(raw);
  if (key == "model") c.model = parse_model(v);
  else if (key == "epochs") c.epochs = parse_number<int>(key, v);
  else if (key == "batch_size") c.batch_size = parse_number<int>(key, v);
  else if (key == "hidden_dimensions") c.hidden_dimensions = detail::parse_dims(key, v);
  else if (key == "learning_rate") c.learning_rate = parse_number<double>(key, v);
  else if (key == "regularization") c.regularization = parse_number<double>(key, v);
  else if (key == "grad_norm") c.grad_norm = parse_number<double>(key, v);
  else if (key == "cl_enabled") c.cl_enabled = parse_bool(key, v);
  else if (key == "cl_weight") c.cl_weight = parse_number<double>(key, v);
  else if (key == "cl_reduction") {
    if (v == "mean") c.cl_reduction = ConstraintReduction::kMean;
    else if (v == "sum") c.cl_reduction = ConstraintReduction::kSum;
    else throw ConfigError("cl_reduction: expected mean or sum, got '" + v + "'");
  } else if (key == "patience") c.patience = parse_number<int>(key, v);
  else if (key == "seed") c.seed = parse_number<std::uint64_t>(key, v);
  else if (key == "use_chem_subgraph") c.use_chem_subgraph = parse_bool(key, v);
  else if (key == "use_gene_subgraph") c.use_gene_subgraph = parse_bool(key, v);
  else if (key == "n_negatives") c.n_negatives = parse_number<int>(key, v);
  else if (key == "message_folds") c.message_folds = parse_number<int>(key, v);
  else if (key == "test_batch_size") c.test_batch_size = parse_number<int>(key, v);
  else if (key == "print_step") c.print_step = parse_number<int>(key, v);
  else if (key == "ap_k" || key == "average_precision_k") c.ap_k = parse_number<int>(key, v);
  else if (key == "cp_k") c.cp_k = parse_number<int>(key, v);
  else if (key == "n_bases") c.n_bases = parse_number<std::size_t>(key, v);
  else if (key == "n_factors") c.n_factors = parse_number<std::size_t>(key, v);
  else if (key == "activation") c.activation = parse_activation(v);
  else if (key == "refine_activation") c.refine_activation = parse_activation(v);
  else if (key == "transe_margin") c.transe_margin = parse_number<double>(key, v);
  else if (key == "sage_sample_size") c.sage_sample_size = parse_number<std::size_t>(key, v);
  else if (key == "split_train") c.split.train = parse_number<double>(key, v);
  else if (key == "split_validation") c.split.validation = parse_number<double>(key, v);
  else if (key == "split_test") c.split.test = parse_number<double>(key, v);
  else if (key == "auc_polarity_mode") {
    if (v == "signed") c.auc_polarity_mode = PolarityMode::kSigned;
    else if (v == "accuracy") c.auc_polarity_mode = PolarityMode::kAccuracy;
    else throw ConfigError("auc_polarity_mode: expected signed or accuracy, got '" + v + "'");
  } else {
    throw ConfigError("unknown config key '" + key + "'");
  }
}

// Every problem with the config, one message per violated constraint.
inline std::vector<std::string> validate(const TrainConfig& c) {
  std::vector<std::string> errs;
  auto need = [&](bool ok, const std::string& msg) {
    if (!ok) errs.push_back(msg);
  };
  need(c.epochs >= 1, "epochs must be >= 1");
  need(c.batch_size >= 1, "batch_size must be >= 1");
  need(!c.hidden_dimensions.empty(), "hidden_dimensions must not be empty");
  for (std::size_t d : c.hidden_dimensions) need(d >= 1, "hidden_dimensions entries must be >= 1");
  need(c.learning_rate > 0, "learning_rate must be > 0");
  need(c.regularization >= 0, "regularization must be >= 0");
  need(c.grad_norm >= 0, "grad_norm must be >= 0 (0 disables clipping)");
  need(c.cl_weight >= 0, "cl_weight must be >= 0");
  need(c.patience >= 1, "patience must be >= 1");
  need(c.n_negatives >= 1, "n_negatives must be >= 1");
  need(c.message_folds >= 0, "message_folds must be >= 0");
  need(c.test_batch_size >= 1, "test_batch_size must be >= 1");
  need(c.print_step >= 1, "print_step must be >= 1");
  need(c.ap_k >= 1, "ap_k must be >= 1");
  need(c.cp_k >= 1, "cp_k must be >= 1");
  need(c.n_bases >= 1, "n_bases must be >= 1");
  need(c.n_factors >= 1, "n_factors must be >= 1");
  need(c.sage_sample_size >= 1, "sage_sample_size must be >= 1");
  need(c.split.train > 0 && c.split.validation > 0 && c.split.test > 0 &&
           std::abs(c.split.train + c.split.validation + c.split.test - 1.0) <= 1e-9,
       "split_train/split_validation/split_test must be positive and sum to 1");
  need(c.model == ModelKind::kRgcntd || (!c.use_chem_subgraph && !c.use_gene_subgraph),
       "subgraph toggles require model=rgcntd");
  return errs;
}

inline void validate_or_throw(const TrainConfig& c) {
  auto errs = validate(c);
  if (errs.empty()) return;
  std::string msg = "invalid configuration:";
  for (const auto& e : errs) msg += "\n  - " + e;
  throw ConfigError(msg);
}

// Canonical key=value text; one line per field in a fixed order.
inline std::string to_text(const TrainConfig& c) {
  std::ostringstream os;
  auto dims = [&] {
    std::string s;
    for (std::size_t i = 0; i < c.hidden_dimensions.size(); ++i) {
      s += (i ? "," : "") + std::to_string(c.hidden_dimensions[i]);
    }
    return s;
  };
  using detail::format_double;
  os << "model=" << to_string(c.model) << '\n'
     << "epochs=" << c.epochs << '\n'
     << "batch_size=" << c.batch_size << '\n'
     << "hidden_dimensions=" << dims() << '\n'
     << "learning_rate=" << format_double(c.learning_rate) << '\n'
     << "regularization=" << format_double(c.regularization) << '\n'
     << "grad_norm=" << format_double(c.grad_norm) << '\n'
     << "cl_enabled=" << (c.cl_enabled ? "on" : "off") << '\n'
     << "cl_weight=" << format_double(c.cl_weight) << '\n'
     << "cl_reduction=" << (c.cl_reduction == ConstraintReduction::kMean ? "mean" : "sum") << '\n'
     << "patience=" << c.patience << '\n'
     << "seed=" << c.seed << '\n'
     << "use_chem_subgraph=" << (c.use_chem_subgraph ? "on" : "off") << '\n'
     << "use_gene_subgraph=" << (c.use_gene_subgraph ? "on" : "off") << '\n'
     << "n_negatives=" << c.n_negatives << '\n'
     << "message_folds=" << c.message_folds << '\n'
     << "test_batch_size=" << c.test_batch_size << '\n'
     << "print_step=" << c.print_step << '\n'
     << "ap_k=" << c.ap_k << '\n'
     << "cp_k=" << c.cp_k << '\n'
     << "n_bases=" << c.n_bases << '\n'
     << "n_factors=" << c.n_factors << '\n'
     << "activation=" << to_string(c.activation) << '\n'
     << "refine_activation=" << to_string(c.refine_activation) << '\n'
     << "transe_margin=" << format_double(c.transe_margin) << '\n'
     << "sage_sample_size=" << c.sage_sample_size << '\n'
     << "split_train=" << format_double(c.split.train) << '\n'
     << "split_validation=" << format_double(c.split.validation) << '\n'
     << "split_test=" << format_double(c.split.test) << '\n'
     << "auc_polarity_mode=" << (c.auc_polarity_mode == PolarityMode::kSigned ? "signed" : "accuracy") << '\n';
  return os.str();
}

// Parses flat key=value text (blank lines and '#' comments skipped) on top of
// `base`.
inline TrainConfig parse_config_text(const std::string& text, TrainConfig base = {}) {
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    line = detail::trim(line);
    if (line.empty() || line.front() == '#') continue;
    auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError("config line " + std::to_string(lineno) + ": expected key=value");
    apply_setting(base, detail::trim(line.substr(0, eq)), line.substr(eq + 1));
  }
  return base;
}

inline TrainConfig load_config(const std::string& path, TrainConfig base = {}) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read config '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str(), std::move(base));
}

// 64-bit FNV-1a.
inline std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : s) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline std::string hex16(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

// Digest of the canonical config text.
inline std::uint64_t config_digest(const TrainConfig& c) { return fnv1a(to_text(c)); }

}  // namespace signet
