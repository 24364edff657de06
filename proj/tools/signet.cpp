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

// signet: generate synthetic data, train and evaluate link models, run
// ablation grids.

#include <CLI11.hpp>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <mutex>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "signet/checkpoint.hpp"
#include "signet/config.hpp"
#include "signet/evaluate.hpp"
#include "signet/report.hpp"
#include "signet/split.hpp"
#include "signet/synthetic.hpp"
#include "signet/training.hpp"

namespace fs = std::filesystem;
using namespace signet;

namespace {

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw IoError("cannot read '" + p.string() + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void prepare_out_dir(const fs::path& dir, bool force) {
  if (fs::exists(dir) && !fs::is_directory(dir)) throw ConfigError("'" + dir.string() + "' is not a directory");
  if (fs::exists(dir) && !fs::is_empty(dir)) {
    if (!force) throw ConfigError("output directory '" + dir.string() + "' is not empty (use --force to overwrite)");
    fs::remove_all(dir);
  }
  fs::create_directories(dir);
}

// Dataset: a directory holding nodes.tsv and edges.tsv.
struct Dataset {
  HeteroGraph graph;
  std::uint64_t digest = 0;
};

Dataset load_dataset(const fs::path& dir) {
  const fs::path nodes = dir / "nodes.tsv", edges = dir / "edges.tsv";
  if (!fs::exists(nodes) || !fs::exists(edges)) {
    throw IoError("data directory '" + dir.string() + "' must contain nodes.tsv and edges.tsv");
  }
  Dataset d;
  d.graph = ingest_tsv(nodes.string(), edges.string());
  d.digest = fnv1a(read_file(nodes) + '\x1f' + read_file(edges));
  return d;
}

std::size_t thread_cap() {
  std::size_t n = std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("SIGNET_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end == env || *end != '\0' || v < 1) throw ConfigError("SIGNET_THREADS must be a positive integer");
    n = static_cast<std::size_t>(v);
  }
  return n;
}

// Config assembly: defaults, then --config file, then individual flags.
struct ConfigFlags {
  std::string config_path;
  std::vector<std::pair<std::string, std::string>> values;  // key -> raw flag text
  std::string cl;

  void attach(CLI::App* app) {
    app->add_option("--config", config_path, "flat key=value config file");
    std::istringstream keys(to_text(TrainConfig{}));
    std::string line;
    values.clear();
    while (std::getline(keys, line)) values.emplace_back(line.substr(0, line.find('=')), "");
    for (auto& [key, raw] : values) {
      std::string names = "--" + key;
      std::string dashed = key;
      std::replace(dashed.begin(), dashed.end(), '_', '-');
      if (dashed != key) names += ",--" + dashed;
      app->add_option(names, raw, "config key " + key);
    }
    app->add_option("--cl", cl, "constraint loss on|off (alias of cl_enabled)");
  }

  TrainConfig build() const {
    TrainConfig c = config_path.empty() ? TrainConfig{} : load_config(config_path);
    for (const auto& [key, raw] : values) {
      if (!raw.empty()) apply_setting(c, key, raw);
    }
    if (!cl.empty()) apply_setting(c, "cl_enabled", cl);
    validate_or_throw(c);
    return c;
  }
};

std::string manifest_text(const ModelState& s, const Dataset& data) {
  std::ostringstream os;
  os << "config_digest=" << hex16(config_digest(s.config)) << '\n'
     << "data_digest=" << hex16(data.digest) << '\n'
     << "chemicals=" << data.graph.num_chemicals() << '\n'
     << "genes=" << data.graph.num_genes() << '\n';
  for (std::size_t i = 0; i < s.params.size(); ++i) {
    os << "param=" << s.params.names()[i] << ' ' << shape_string(s.params[i].shape()) << '\n';
  }
  return os.str();
}

std::map<std::string, std::string> read_manifest(const fs::path& p) {
  std::map<std::string, std::string> out;
  std::istringstream in(read_file(p));
  std::string line;
  while (std::getline(in, line)) {
    auto eq = line.find('=');
    if (eq != std::string::npos && line.compare(0, 6, "param=") != 0) out[line.substr(0, eq)] = line.substr(eq + 1);
  }
  return out;
}

// ---- generate ----

struct GenerateArgs {
  SyntheticParams params{.subgraph_density = 0.1};
  std::string out;
  bool force = false;
};

int run_generate(const GenerateArgs& a) {
  SyntheticGraph syn = generate_synthetic(a.params);
  const fs::path dir(a.out);
  prepare_out_dir(dir, a.force);
  write_tsv(syn.graph, (dir / "nodes.tsv").string(), (dir / "edges.tsv").string());
  std::ostringstream signs;
  signs << "# node_id\tlatent_sign\n";
  const auto& chem = syn.graph.names(NodeKind::kChemical);
  const auto& gene = syn.graph.names(NodeKind::kGene);
  for (std::size_t i = 0; i < chem.size(); ++i) signs << chem[i] << '\t' << syn.chem_sign[i] << '\n';
  for (std::size_t i = 0; i < gene.size(); ++i) signs << gene[i] << '\t' << syn.gene_sign[i] << '\n';
  detail::write_file(dir / "latent_signs.tsv", signs.str());
  std::cout << "wrote " << syn.graph.num_nodes() << " nodes, " << syn.graph.num_edges() << " edges to " << dir.string()
            << '\n';
  return 0;
}

// ---- train ----

struct RunOutcome {
  ModelState state;
  EvalReport report;
  TrainLog log;
};

RunOutcome train_and_evaluate(const Dataset& data, const TrainConfig& cfg, std::ostream* progress) {
  EdgeSplit split = split_edges(data.graph, cfg.split, cfg.seed);
  auto tm = train_model(data.graph, split, cfg, progress);
  RunOutcome out;
  out.report = evaluate(*tm.model, data.graph, split, cfg);
  out.state = std::move(tm.result.state);
  out.log = std::move(tm.result.log);
  for (const auto& w : split.warnings) out.report.notes.push_back(w);
  for (const auto& w : out.log.warnings) out.report.notes.push_back(w);
  return out;
}

int run_train(const std::string& data_dir, const std::string& out, bool force, const TrainConfig& cfg) {
  const Dataset data = load_dataset(data_dir);
  const fs::path run = fs::path(out) / ("run-" + hex16(config_digest(cfg)));
  prepare_out_dir(run, force);
  std::cerr << "training " << to_string(cfg.model) << " (cl " << (cfg.cl_enabled ? "on" : "off") << ") into "
            << run.string() << '\n';
  RunOutcome r = train_and_evaluate(data, cfg, &std::cerr);
  detail::write_file(run / "manifest.txt", manifest_text(r.state, data));
  detail::write_file(run / "config.txt", to_text(cfg));
  save_checkpoint(r.state, (run / "checkpoint.bin").string());
  std::ostringstream log;
  r.log.write_csv(log);
  detail::write_file(run / "train_log.csv", log.str());
  write_report(run, r.report, cfg);
  for (const auto& [name, v] : r.report.metrics()) std::cout << name << ' ' << detail::format_double(v) << '\n';
  std::cout << "run " << run.string() << '\n';
  return 0;
}

// ---- eval ----

int run_eval(const std::string& data_dir, const std::string& checkpoint, std::string out) {
  const fs::path ckpt(checkpoint);
  if (!fs::exists(ckpt)) throw IoError("checkpoint '" + checkpoint + "' does not exist");
  const Dataset data = load_dataset(data_dir);
  ModelState state = load_checkpoint(checkpoint);
  const fs::path manifest = ckpt.parent_path() / "manifest.txt";
  if (fs::exists(manifest)) {
    auto m = read_manifest(manifest);
    if (m["config_digest"] != hex16(config_digest(state.config))) {
      throw ConfigError("checkpoint config does not match " + manifest.string());
    }
    if (m["data_digest"] != hex16(data.digest)) {
      throw ConfigError("data in '" + data_dir + "' differs from the data this checkpoint was trained on");
    }
  }
  EdgeSplit split = split_edges(data.graph, state.config.split, state.config.seed);
  EvalReport rep = evaluate(state, data.graph, split);
  const fs::path dir = out.empty() ? ckpt.parent_path() / "eval" : fs::path(out);
  fs::create_directories(dir);
  write_report(dir, rep, state.config);
  for (const auto& [name, v] : rep.metrics()) std::cout << name << ' ' << detail::format_double(v) << '\n';
  return 0;
}

// ---- ablate ----

struct Arm {
  std::string label;
  TrainConfig config;
};

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = detail::trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

std::vector<Arm> build_arms(const std::string& grid, const std::vector<std::string>& models, const TrainConfig& base) {
  if (models.empty()) throw ConfigError("--models must name at least one model");
  std::vector<Arm> arms;
  if (grid == "cl") {
    for (const auto& name : models) {
      for (bool cl : {true, false}) {
        Arm a{name + (cl ? " CL" : " No CL"), base};
        a.config.model = parse_model(name);
        a.config.cl_enabled = cl;
        arms.push_back(std::move(a));
      }
    }
  } else if (grid == "subgraph") {
    for (const auto& name : models) {
      if (parse_model(name) != ModelKind::kRgcntd) throw ConfigError("--grid subgraph requires --models rgcntd");
    }
    const std::pair<const char*, std::pair<bool, bool>> variants[] = {{"Subgraph", {true, true}},
                                                                      {"Only Chemical", {true, false}},
                                                                      {"Only Gene", {false, true}},
                                                                      {"No Subgraph", {false, false}}};
    for (const auto& [label, flags] : variants) {
      Arm a{label, base};
      a.config.model = ModelKind::kRgcntd;
      a.config.use_chem_subgraph = flags.first;
      a.config.use_gene_subgraph = flags.second;
      arms.push_back(std::move(a));
    }
  } else {
    throw ConfigError("--grid must be cl or subgraph, got '" + grid + "'");
  }
  for (const auto& a : arms) validate_or_throw(a.config);
  return arms;
}

double median(std::vector<double> v) {
  std::erase_if(v, [](double x) { return std::isnan(x); });
  if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

int run_ablate(const std::string& data_dir, const std::string& out, bool force, const std::string& grid,
               const std::string& models_arg, int seeds, const TrainConfig& base) {
  if (seeds < 1) throw ConfigError("--seeds must be >= 1");
  const std::vector<Arm> arms = build_arms(grid, split_list(models_arg), base);
  const Dataset data = load_dataset(data_dir);
  const fs::path dir(out);
  prepare_out_dir(dir, force);

  struct Job {
    std::size_t arm;
    int seed_index;
  };
  std::vector<Job> jobs;
  for (std::size_t a = 0; a < arms.size(); ++a) {
    for (int s = 0; s < seeds; ++s) jobs.push_back({a, s});
  }
  std::vector<EvalReport> results(jobs.size());
  std::vector<std::exception_ptr> errors(jobs.size());
  std::atomic<std::size_t> next{0};
  std::mutex log_mu;
  auto worker = [&] {
    for (std::size_t j; (j = next.fetch_add(1)) < jobs.size();) {
      TrainConfig cfg = arms[jobs[j].arm].config;
      cfg.seed = base.seed + static_cast<std::uint64_t>(jobs[j].seed_index);
      try {
        results[j] = train_and_evaluate(data, cfg, nullptr).report;
      } catch (...) {
        errors[j] = std::current_exception();
      }
      std::lock_guard lock(log_mu);
      std::cerr << "done " << arms[jobs[j].arm].label << " seed " << cfg.seed << '\n';
    }
  };
  const std::size_t n_threads = std::min(thread_cap(), jobs.size());
  std::vector<std::thread> pool;
  for (std::size_t t = 0; t < n_threads; ++t) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }

  const auto names = results.front().metrics();
  std::ostringstream runs, summary;
  runs << "arm,seed";
  summary << "arm,seeds";
  for (const auto& [name, v] : names) {
    runs << ',' << name;
    summary << ',' << name;
  }
  runs << '\n';
  summary << '\n';
  for (std::size_t a = 0; a < arms.size(); ++a) {
    std::vector<std::vector<double>> cols(names.size());
    for (std::size_t j = 0; j < jobs.size(); ++j) {
      if (jobs[j].arm != a) continue;
      runs << arms[a].label << ',' << base.seed + static_cast<std::uint64_t>(jobs[j].seed_index);
      const auto m = results[j].metrics();
      for (std::size_t k = 0; k < m.size(); ++k) {
        runs << ',' << detail::format_double(m[k].second);
        cols[k].push_back(m[k].second);
      }
      runs << '\n';
    }
    summary << arms[a].label << ',' << seeds;
    for (auto& c : cols) summary << ',' << detail::format_double(median(c));
    summary << '\n';
  }
  detail::write_file(dir / "ablation_runs.csv", runs.str());
  detail::write_file(dir / "ablation.csv", summary.str());
  std::cout << summary.str();
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"signet: signed chemical-gene link prediction"};
  app.require_subcommand(1);

  GenerateArgs gen;
  auto* generate = app.add_subcommand("generate", "write a synthetic planted-polarity dataset");
  generate->add_option("--out", gen.out, "output directory")->required();
  generate->add_option("--chem", gen.params.n_chem, "number of chemicals");
  generate->add_option("--gene", gen.params.n_gene, "number of genes");
  generate->add_option("--density", gen.params.density, "chemical-gene pair density");
  generate->add_option("--polarity-signal", gen.params.polarity_signal, "probability an edge follows planted signs");
  generate->add_option("--binding-fraction", gen.params.binding_fraction, "fraction of pairs with a Binding edge");
  generate->add_option("--subgraph-density", gen.params.subgraph_density, "same-sign subgraph edge probability");
  generate->add_option("--seed", gen.params.seed, "random seed");
  generate->add_flag("--force", gen.force, "overwrite a non-empty output directory");

  std::string data_dir, out, checkpoint;
  bool force = false;
  ConfigFlags train_flags;
  auto* train = app.add_subcommand("train", "train one model and write a run directory");
  train->add_option("--data", data_dir, "directory with nodes.tsv and edges.tsv")->required();
  train->add_option("--out", out, "parent directory for the run")->required();
  train->add_flag("--force", force, "overwrite an existing run directory");
  train_flags.attach(train);

  auto* eval = app.add_subcommand("eval", "evaluate a checkpoint on its test split");
  std::string eval_data, eval_out;
  eval->add_option("--data", eval_data, "directory with nodes.tsv and edges.tsv")->required();
  eval->add_option("--checkpoint", checkpoint, "checkpoint.bin from a run directory")->required();
  eval->add_option("--out", eval_out, "report directory (default: <run>/eval)");

  ConfigFlags ablate_flags;
  std::string ab_data, ab_out, grid = "cl", models = "rgcntd";
  int seeds = 5;
  bool ab_force = false;
  auto* ablate = app.add_subcommand("ablate", "run an ablation grid over seeds and report medians");
  ablate->add_option("--data", ab_data, "directory with nodes.tsv and edges.tsv")->required();
  ablate->add_option("--out", ab_out, "output directory")->required();
  ablate->add_option("--grid", grid, "cl or subgraph");
  ablate->add_option("--models", models, "comma-separated model list");
  ablate->add_option("--seeds", seeds, "number of seeds (seed, seed+1, ...)");
  ablate->add_flag("--force", ab_force, "overwrite a non-empty output directory");
  ablate_flags.attach(ablate);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : static_cast<int>(ExitCode::kConfig);
  }

  try {
    if (*generate) return run_generate(gen);
    if (*train) return run_train(data_dir, out, force, train_flags.build());
    if (*eval) return run_eval(eval_data, checkpoint, eval_out);
    if (*ablate) return run_ablate(ab_data, ab_out, ab_force, grid, models, seeds, ablate_flags.build());
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return static_cast<int>(e.code());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
