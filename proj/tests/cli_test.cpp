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

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

namespace fs = std::filesystem;

namespace {

struct Result {
  int code = -1;
  std::string out;
};

Result run(const std::string& args, const std::string& env = "") {
  const fs::path log = fs::temp_directory_path() / ("signet_cli_" + std::to_string(::getpid()) + ".log");
  const std::string cmd = env + " \"" SIGNET_CLI_PATH "\" " + args + " > \"" + log.string() + "\" 2>&1";
  const int status = std::system(cmd.c_str());
  Result r;
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  std::ifstream in(log);
  std::stringstream ss;
  ss << in.rdbuf();
  r.out = ss.str();
  fs::remove(log);
  return r;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::size_t data_rows(const fs::path& csv) {
  std::istringstream in(slurp(csv));
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) ++n;
  return n - 1;
}

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    root_ = fs::temp_directory_path() / ("signet_cli_" + std::string(
        ::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(root_);
    fs::create_directories(root_);
  }
  void TearDown() override { fs::remove_all(root_); }

  std::string data() {
    const fs::path d = root_ / "data";
    if (!fs::exists(d)) {
      auto r = run("generate --out " + d.string() + " --density 0.2 --seed 3");
      EXPECT_EQ(r.code, 0) << r.out;
    }
    return d.string();
  }

  fs::path root_;
};

const char* kQuick = " --epochs 3 --hidden-dimensions 8,4";

}  // namespace

TEST_F(Cli, GenerateWritesDataset) {
  const std::string d = data();
  for (const char* f : {"nodes.tsv", "edges.tsv", "latent_signs.tsv"}) EXPECT_TRUE(fs::exists(fs::path(d) / f)) << f;
}

TEST_F(Cli, GenerateRejectsZeroDensity) {
  auto r = run("generate --out " + (root_ / "z").string() + " --density 0");
  EXPECT_EQ(r.code, 2) << r.out;
}

TEST_F(Cli, GenerateRefusesNonEmptyWithoutForce) {
  const std::string d = data();
  EXPECT_EQ(run("generate --out " + d).code, 2);
  EXPECT_EQ(run("generate --out " + d + " --force").code, 0);
}

TEST_F(Cli, TrainWritesRunDirectory) {
  auto r = run("train --data " + data() + " --out " + (root_ / "runs").string() + kQuick);
  ASSERT_EQ(r.code, 0) << r.out;
  fs::path run_dir;
  for (const auto& e : fs::directory_iterator(root_ / "runs")) run_dir = e.path();
  for (const char* f : {"manifest.txt", "config.txt", "checkpoint.bin", "train_log.csv", "report.txt", "metrics.csv",
                        "paired_ranks.csv", "paired_ranks.svg", "c_distribution.csv", "c_histogram.csv",
                        "c_histogram.svg"}) {
    EXPECT_TRUE(fs::exists(run_dir / f)) << f;
  }
  const std::string metrics = slurp(run_dir / "metrics.csv");
  for (const char* m : {"MACRO_AUROC", "MICRO_AUROC", "MACRO_AUPRC", "MICRO_AUPRC", "AP@20", "AUC_polarity", "CP@500"}) {
    EXPECT_NE(metrics.find(m), std::string::npos) << m;
  }
  EXPECT_EQ(data_rows(run_dir / "metrics.csv"), 7u);

  // Re-running into an existing run needs --force.
  EXPECT_EQ(run("train --data " + data() + " --out " + (root_ / "runs").string() + kQuick).code, 2);

  auto e = run("eval --data " + data() + " --checkpoint " + (run_dir / "checkpoint.bin").string());
  ASSERT_EQ(e.code, 0) << e.out;
  EXPECT_EQ(slurp(run_dir / "eval" / "metrics.csv"), metrics);
}

TEST_F(Cli, UnknownModelListsChoices) {
  auto r = run("train --data " + data() + " --out " + (root_ / "runs").string() + " --model bionet");
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.out.find("rgcntd, rgcn, graphsage, transe"), std::string::npos) << r.out;
}

TEST_F(Cli, ConfigFileThenFlagsOverride) {
  const fs::path cfg = root_ / "run.conf";
  std::ofstream(cfg) << "# quick\nepochs=2\nmodel=transe\nseed=9\n";
  auto r = run("train --data " + data() + " --out " + (root_ / "runs").string() + " --config " + cfg.string() +
               " --seed 4");
  ASSERT_EQ(r.code, 0) << r.out;
  fs::path run_dir;
  for (const auto& e : fs::directory_iterator(root_ / "runs")) run_dir = e.path();
  const std::string text = slurp(run_dir / "config.txt");
  EXPECT_NE(text.find("model=transe\n"), std::string::npos);
  EXPECT_NE(text.find("epochs=2\n"), std::string::npos);
  EXPECT_NE(text.find("seed=4\n"), std::string::npos);
}

TEST_F(Cli, BadConfigValueIsConfigError) {
  const std::string base = "train --data " + data() + " --out " + (root_ / "runs").string();
  EXPECT_EQ(run(base + " --epochs 0").code, 2);
  EXPECT_EQ(run(base + " --learning-rate abc").code, 2);
  EXPECT_EQ(run(base + " --model transe --use-chem-subgraph on").code, 2);
}

TEST_F(Cli, MissingDataIsDataError) {
  EXPECT_EQ(run("train --data " + (root_ / "nowhere").string() + " --out " + root_.string()).code, 3);
}

TEST_F(Cli, EvalMissingCheckpoint) {
  auto r = run("eval --data " + data() + " --checkpoint " + (root_ / "none.bin").string());
  EXPECT_NE(r.code, 0);
  EXPECT_NE(r.out.find("does not exist"), std::string::npos);
}

TEST_F(Cli, EvalRefusesDifferentData) {
  ASSERT_EQ(run("train --data " + data() + " --out " + (root_ / "runs").string() + kQuick).code, 0);
  fs::path run_dir;
  for (const auto& e : fs::directory_iterator(root_ / "runs")) run_dir = e.path();
  const std::string other = (root_ / "other").string();
  ASSERT_EQ(run("generate --out " + other + " --density 0.2 --seed 4").code, 0);
  EXPECT_EQ(run("eval --data " + other + " --checkpoint " + (run_dir / "checkpoint.bin").string()).code, 2);
}

TEST_F(Cli, AblateClGrid) {
  auto r = run("ablate --data " + data() + " --out " + (root_ / "ab").string() +
                   " --grid cl --models rgcntd,transe --seeds 3" + kQuick,
               "SIGNET_THREADS=2");
  ASSERT_EQ(r.code, 0) << r.out;
  EXPECT_EQ(data_rows(root_ / "ab" / "ablation.csv"), 4u);
  EXPECT_EQ(data_rows(root_ / "ab" / "ablation_runs.csv"), 12u);
}

TEST_F(Cli, AblateSubgraphGridLabels) {
  auto r = run("ablate --data " + data() + " --out " + (root_ / "ab").string() + " --grid subgraph --seeds 1" + kQuick);
  ASSERT_EQ(r.code, 0) << r.out;
  const std::string csv = slurp(root_ / "ab" / "ablation.csv");
  for (const char* arm : {"\nSubgraph,", "\nOnly Chemical,", "\nOnly Gene,", "\nNo Subgraph,"}) {
    EXPECT_NE(csv.find(arm), std::string::npos) << arm;
  }
  EXPECT_EQ(data_rows(root_ / "ab" / "ablation.csv"), 4u);
}

TEST_F(Cli, AblateThreadCountDoesNotChangeResults) {
  const std::string base = "ablate --data " + data() + " --grid cl --models transe --seeds 2" + std::string(kQuick);
  ASSERT_EQ(run(base + " --out " + (root_ / "a").string(), "SIGNET_THREADS=1").code, 0);
  ASSERT_EQ(run(base + " --out " + (root_ / "b").string(), "SIGNET_THREADS=4").code, 0);
  EXPECT_EQ(slurp(root_ / "a" / "ablation.csv"), slurp(root_ / "b" / "ablation.csv"));
  EXPECT_EQ(run(base + " --out " + (root_ / "c").string(), "SIGNET_THREADS=zero").code, 2);
}

TEST_F(Cli, AblateEmptyModelsIsConfigError) {
  auto r = run("ablate --data " + data() + " --out " + (root_ / "ab").string() + " --models ''");
  EXPECT_EQ(r.code, 2) << r.out;
}
