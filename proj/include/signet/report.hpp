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
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "signet/config.hpp"
#include "signet/error.hpp"
#include "signet/evaluate.hpp"
#include "signet/metrics.hpp"

namespace signet {

namespace detail {

inline std::string fixed(double v, int digits = 6) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

inline void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw IoError("cannot open " + path.string() + " for writing");
  os << text;
  if (!os) throw IoError("failed writing " + path.string());
}

}  // namespace detail

inline std::string metrics_csv(const EvalReport& rep) {
  std::ostringstream os;
  os << "metric,value\n";
  for (const auto& [name, v] : rep.metrics()) os << name << ',' << detail::format_double(v) << '\n';
  return os.str();
}

inline std::string report_text(const EvalReport& rep, const TrainConfig& cfg) {
  std::ostringstream os;
  os << "model: " << to_string(cfg.model) << "\n"
     << "constraint loss: " << (cfg.cl_enabled ? "on" : "off") << "\n"
     << "seed: " << cfg.seed << "\n"
     << "config digest: " << hex16(config_digest(cfg)) << "\n"
     << "test records: " << rep.records.size() << "\n"
     << "polar test pairs: " << rep.polar.size() << "\n\n";
  for (const auto& [name, v] : rep.metrics()) os << name << '\t' << detail::fixed(v) << '\n';
  if (!rep.notes.empty()) {
    os << "\nnotes:\n";
    for (const auto& n : rep.notes) os << "  " << n << '\n';
  }
  return os.str();
}

struct PairedRanks {
  std::vector<std::size_t> decrease;  // 1-based rank of P_decrease among pairs
  std::vector<std::size_t> increase;
};

inline PairedRanks paired_ranks(std::span<const PolarPrediction> polar) {
  std::vector<double> inc(polar.size()), dec(polar.size());
  for (std::size_t i = 0; i < polar.size(); ++i) {
    inc[i] = polar[i].record.p_increase;
    dec[i] = polar[i].record.p_decrease;
  }
  return {descending_ranks(dec), descending_ranks(inc)};
}

inline std::string paired_ranks_csv(std::span<const PolarPrediction> polar) {
  const PairedRanks r = paired_ranks(polar);
  std::ostringstream os;
  os << "pair_id,log2_rank_decrease,log2_rank_increase\n";
  for (std::size_t i = 0; i < polar.size(); ++i) {
    os << i << ',' << detail::fixed(std::log2(static_cast<double>(r.decrease[i]))) << ','
       << detail::fixed(std::log2(static_cast<double>(r.increase[i]))) << '\n';
  }
  return os.str();
}

// Two vertical log2-rank axes (Decrease left, Increase right) with one line
// per pair, coloured by true polarity.
inline std::string paired_ranks_svg(std::span<const PolarPrediction> polar) {
  const PairedRanks r = paired_ranks(polar);
  constexpr double kW = 420, kH = 640, kLeft = 80, kRight = 340, kTop = 40, kBottom = 600;
  const double max_log = std::max(1.0, std::log2(static_cast<double>(std::max<std::size_t>(polar.size(), 1))));
  auto y = [&](std::size_t rank) { return kTop + (kBottom - kTop) * std::log2(static_cast<double>(rank)) / max_log; };
  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kW << "\" height=\"" << kH << "\">\n"
     << "<rect x=\"0\" y=\"0\" width=\"" << kW << "\" height=\"" << kH << "\" fill=\"white\"/>\n"
     << "<path d=\"M" << kLeft << ' ' << kTop << " V" << kBottom << " M" << kRight << ' ' << kTop << " V" << kBottom
     << "\" stroke=\"black\"/>\n"
     << "<text x=\"" << kLeft << "\" y=\"25\" text-anchor=\"middle\">Decrease</text>\n"
     << "<text x=\"" << kRight << "\" y=\"25\" text-anchor=\"middle\">Increase</text>\n"
     << "<text x=\"" << kW / 2 << "\" y=\"625\" text-anchor=\"middle\">log2 rank</text>\n";
  for (std::size_t i = 0; i < polar.size(); ++i) {
    const char* colour = polar[i].record.truth == Polarity::kPositive ? "#c0392b" : "#2471a3";
    os << "<line x1=\"" << kLeft << "\" y1=\"" << detail::fixed(y(r.decrease[i]), 2) << "\" x2=\"" << kRight
       << "\" y2=\"" << detail::fixed(y(r.increase[i]), 2) << "\" stroke=\"" << colour
       << "\" stroke-opacity=\"0.5\"/>\n";
  }
  os << "</svg>\n";
  return os.str();
}

inline std::string c_distribution_csv(std::span<const PolarPrediction> polar) {
  std::ostringstream os;
  os << "pair_id,C,C_prime,correct\n";
  for (std::size_t i = 0; i < polar.size(); ++i) {
    const double c = polarity_degree(polar[i].record.p_increase, polar[i].record.p_decrease);
    os << i << ',' << detail::format_double(c) << ',' << detail::format_double(transform_c(c)) << ','
       << (polarity_correct(polar[i].record) ? 1 : 0) << '\n';
  }
  return os.str();
}

inline constexpr std::size_t kHistogramBins = 20;

struct Histograms {
  std::vector<std::size_t> c;
  std::vector<std::size_t> c_prime;
};

inline Histograms c_histograms(std::span<const PolarPrediction> polar) {
  Histograms h{std::vector<std::size_t>(kHistogramBins), std::vector<std::size_t>(kHistogramBins)};
  auto bin = [](double v) { return std::min(kHistogramBins - 1, static_cast<std::size_t>(v * kHistogramBins)); };
  for (const auto& p : polar) {
    const double c = polarity_degree(p.record.p_increase, p.record.p_decrease);
    ++h.c[bin(c)];
    ++h.c_prime[bin(transform_c(c))];
  }
  return h;
}

inline std::string c_histogram_csv(std::span<const PolarPrediction> polar) {
  const Histograms h = c_histograms(polar);
  std::ostringstream os;
  os << "bin_low,bin_high,count_C,count_C_prime\n";
  for (std::size_t b = 0; b < kHistogramBins; ++b) {
    os << detail::fixed(static_cast<double>(b) / kHistogramBins, 2) << ','
       << detail::fixed(static_cast<double>(b + 1) / kHistogramBins, 2) << ',' << h.c[b] << ',' << h.c_prime[b]
       << '\n';
  }
  return os.str();
}

// Side-by-side bar charts of C and C'.
inline std::string c_histogram_svg(std::span<const PolarPrediction> polar) {
  const Histograms h = c_histograms(polar);
  constexpr double kPanel = 320, kH = 260, kBase = 220, kPad = 30;
  std::size_t peak = 1;
  for (std::size_t b = 0; b < kHistogramBins; ++b) peak = std::max({peak, h.c[b], h.c_prime[b]});
  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << 2 * kPanel << "\" height=\"" << kH << "\">\n"
     << "<rect x=\"0\" y=\"0\" width=\"" << 2 * kPanel << "\" height=\"" << kH << "\" fill=\"white\"/>\n";
  const std::vector<std::size_t>* panels[2] = {&h.c, &h.c_prime};
  const char* titles[2] = {"C", "C'"};
  for (int p = 0; p < 2; ++p) {
    const double x0 = p * kPanel + kPad;
    const double bar = (kPanel - 2 * kPad) / kHistogramBins;
    os << "<text x=\"" << x0 + (kPanel - 2 * kPad) / 2 << "\" y=\"20\" text-anchor=\"middle\">" << titles[p]
       << "</text>\n";
    for (std::size_t b = 0; b < kHistogramBins; ++b) {
      const double height = (kBase - kPad) * static_cast<double>((*panels[p])[b]) / static_cast<double>(peak);
      os << "<rect x=\"" << detail::fixed(x0 + b * bar, 2) << "\" y=\"" << detail::fixed(kBase - height, 2)
         << "\" width=\"" << detail::fixed(bar - 1, 2) << "\" height=\"" << detail::fixed(height, 2)
         << "\" fill=\"#566573\"/>\n";
    }
    os << "<path d=\"M" << x0 << ' ' << kBase << " H" << x0 + kPanel - 2 * kPad << "\" stroke=\"black\"/>\n";
  }
  os << "</svg>\n";
  return os.str();
}

// Writes every report artefact into `dir`.
inline void write_report(const std::filesystem::path& dir, const EvalReport& rep, const TrainConfig& cfg) {
  std::filesystem::create_directories(dir);
  detail::write_file(dir / "report.txt", report_text(rep, cfg));
  detail::write_file(dir / "metrics.csv", metrics_csv(rep));
  detail::write_file(dir / "paired_ranks.csv", paired_ranks_csv(rep.polar));
  detail::write_file(dir / "paired_ranks.svg", paired_ranks_svg(rep.polar));
  detail::write_file(dir / "c_distribution.csv", c_distribution_csv(rep.polar));
  detail::write_file(dir / "c_histogram.csv", c_histogram_csv(rep.polar));
  detail::write_file(dir / "c_histogram.svg", c_histogram_svg(rep.polar));
}

}  // namespace signet
