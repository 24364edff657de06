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

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "signet/evaluate.hpp"
#include "signet/report.hpp"
#include "signet/split.hpp"
#include "signet/synthetic.hpp"

using namespace signet;

namespace {

std::size_t count(const std::string& s, const std::string& needle) {
  std::size_t n = 0;
  for (auto p = s.find(needle); p != std::string::npos; p = s.find(needle, p + 1)) ++n;
  return n;
}

std::size_t lines(const std::string& s) { return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n')); }

PolarPrediction polar(double inc, double dec, Polarity truth) {
  PolarPrediction p;
  p.record = {inc, dec, truth};
  return p;
}

struct Untrained {
  SyntheticGraph syn;
  EdgeSplit split;
  TrainConfig cfg;
  std::unique_ptr<LinkModel> model;
};

Untrained untrained(std::uint64_t seed) {
  Untrained u;
  SyntheticParams sp;
  sp.seed = seed;
  sp.density = 0.2;
  u.syn = generate_synthetic(sp);
  u.split = split_edges(u.syn.graph, {}, seed);
  u.cfg.seed = seed;
  u.model = make_model(u.cfg.model_config(), 50, 50, seed);
  u.model->prepare(message_graph(u.syn.graph, u.split));
  return u;
}

}  // namespace

TEST(PairedRanks, SinglePair) {
  std::vector<PolarPrediction> one{polar(0.7, 0.2, Polarity::kPositive)};
  const std::string csv = paired_ranks_csv(one);
  EXPECT_EQ(lines(csv), 2u);
  EXPECT_EQ(csv, "pair_id,log2_rank_decrease,log2_rank_increase\n0,0.000000,0.000000\n");
  EXPECT_EQ(count(paired_ranks_svg(one), "<line"), 1u);
}

TEST(PairedRanks, AntiCorrelatedGivesReversedRanks) {
  std::vector<PolarPrediction> ps;
  for (int i = 0; i < 6; ++i) ps.push_back(polar(0.1 * i, 1 - 0.1 * i, Polarity::kNegative));
  auto r = paired_ranks(ps);
  for (std::size_t i = 0; i < ps.size(); ++i) EXPECT_EQ(r.increase[i] + r.decrease[i], ps.size() + 1);
  EXPECT_EQ(count(paired_ranks_svg(ps), "<line"), ps.size());
}

TEST(CDistribution, RowsAndHistogramTotals) {
  std::vector<PolarPrediction> ps{polar(0.9, 0.1, Polarity::kPositive), polar(0.5, 0.5, Polarity::kNegative),
                                  polar(0.2, 0.6, Polarity::kNegative)};
  EXPECT_EQ(lines(c_distribution_csv(ps)), 4u);
  auto h = c_histograms(ps);
  ASSERT_EQ(h.c.size(), kHistogramBins);
  std::size_t total_c = 0, total_cp = 0;
  for (std::size_t b = 0; b < kHistogramBins; ++b) {
    total_c += h.c[b];
    total_cp += h.c_prime[b];
  }
  EXPECT_EQ(total_c, 3u);
  EXPECT_EQ(total_cp, 3u);
  EXPECT_EQ(h.c[0], 1u);  // C = 0 lands in the first bin
  EXPECT_EQ(lines(c_histogram_csv(ps)), kHistogramBins + 1);
  EXPECT_EQ(count(c_histogram_svg(ps), "<rect"), 2 * kHistogramBins + 1);
}

TEST(Evaluate, UntrainedIsNearChance) {
  auto u = untrained(2);
  auto rep = evaluate(*u.model, u.syn.graph, u.split, u.cfg);
  EXPECT_GE(rep.micro_auroc, 0.4);
  EXPECT_LE(rep.micro_auroc, 0.6);
  auto m = rep.metrics();
  ASSERT_EQ(m.size(), 7u);
  EXPECT_EQ(m[4].first, "AP@20");
  EXPECT_EQ(m[6].first, "CP@500");
  for (const auto& [name, v] : m) EXPECT_FALSE(std::isnan(v)) << name;
  EXPECT_TRUE(rep.cp_clamped);
  EXPECT_EQ(rep.records.size(), 2 * u.split.test.size());
}

TEST(Evaluate, Deterministic) {
  auto a = untrained(5);
  auto b = untrained(5);
  auto ra = evaluate(*a.model, a.syn.graph, a.split, a.cfg);
  auto rb = evaluate(*b.model, b.syn.graph, b.split, b.cfg);
  EXPECT_EQ(metrics_csv(ra), metrics_csv(rb));
  EXPECT_EQ(paired_ranks_csv(ra.polar), paired_ranks_csv(rb.polar));
}

TEST(Evaluate, EmptyTestThrows) {
  auto u = untrained(1);
  u.split.test.clear();
  EXPECT_THROW(evaluate(*u.model, u.syn.graph, u.split, u.cfg), UndefinedMetricError);
}

TEST(Evaluate, NoPolarPairsLeavesPolarityUndefined) {
  auto u = untrained(1);
  std::erase_if(u.split.test, [](const Triplet& t) { return is_polar(t.relation); });
  auto rep = evaluate(*u.model, u.syn.graph, u.split, u.cfg);
  EXPECT_TRUE(std::isnan(rep.auc_polarity));
  EXPECT_FALSE(rep.notes.empty());
}

TEST(WriteReport, FilesAndByteIdenticalReruns) {
  auto u = untrained(3);
  auto rep = evaluate(*u.model, u.syn.graph, u.split, u.cfg);
  auto base = std::filesystem::temp_directory_path() / "signet_report_test";
  std::filesystem::remove_all(base);
  write_report(base / "a", rep, u.cfg);
  write_report(base / "b", rep, u.cfg);
  for (const char* f : {"report.txt", "metrics.csv", "paired_ranks.csv", "paired_ranks.svg", "c_distribution.csv",
                        "c_histogram.csv", "c_histogram.svg"}) {
    auto read = [](const std::filesystem::path& p) {
      std::ifstream in(p, std::ios::binary);
      std::stringstream ss;
      ss << in.rdbuf();
      return ss.str();
    };
    ASSERT_TRUE(std::filesystem::exists(base / "a" / f)) << f;
    EXPECT_EQ(read(base / "a" / f), read(base / "b" / f)) << f;
  }
  std::filesystem::remove_all(base);
}
