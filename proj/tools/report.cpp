// Copyright 2026 The spikenas Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "report.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include <fmt/format.h>
#include <fmt/ostream.h>

namespace spikenas::cli {

namespace {

constexpr double kWidth = 640, kHeight = 480, kMargin = 60;

struct Axis {
  double lo, hi;
  double map(double v, double from, double to) const {
    return hi > lo ? from + (v - lo) / (hi - lo) * (to - from) : 0.5 * (from + to);
  }
};

Axis bounds(const std::vector<double>& v) {
  const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
  const double pad = (*hi - *lo) * 0.05;
  return {*lo - pad, *hi + pad};
}

}  // namespace

void write_scatter_svg(std::ostream& os, const std::vector<FitnessRecord>& records, double top_fraction) {
  std::vector<double> e, a;
  for (const auto& r : records) {
    e.push_back(r.energy_joules * 1e3);
    a.push_back(r.accuracy);
  }
  const Axis ex = bounds(e), ay = bounds(a);
  const auto x = [&](double v) { return ex.map(v, kMargin, kWidth - kMargin / 2); };
  const auto y = [&](double v) { return ay.map(v, kHeight - kMargin, kMargin / 2); };

  std::vector<double> sorted = a;
  std::sort(sorted.begin(), sorted.end(), std::greater<>());
  const auto top_n = static_cast<std::size_t>(std::ceil(top_fraction * static_cast<double>(records.size())));
  const double cutoff = top_n == 0 ? std::numeric_limits<double>::infinity() : sorted[top_n - 1];

  fmt::print(os, "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
  fmt::print(os, "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{}\" height=\"{}\" viewBox=\"0 0 {} {}\">\n", kWidth,
             kHeight, kWidth, kHeight);
  fmt::print(os, "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n");
  fmt::print(os, "<line x1=\"{0}\" y1=\"{1}\" x2=\"{2}\" y2=\"{1}\" stroke=\"black\"/>\n", kMargin, kHeight - kMargin,
             kWidth - kMargin / 2);
  fmt::print(os, "<line x1=\"{0}\" y1=\"{1}\" x2=\"{0}\" y2=\"{2}\" stroke=\"black\"/>\n", kMargin, kHeight - kMargin,
             kMargin / 2);
  fmt::print(os, "<text x=\"{}\" y=\"{}\" text-anchor=\"middle\" font-size=\"14\">energy (mJ)</text>\n", kWidth / 2,
             kHeight - 15);
  fmt::print(os,
             "<text x=\"15\" y=\"{}\" text-anchor=\"middle\" font-size=\"14\" "
             "transform=\"rotate(-90 15 {})\">accuracy</text>\n",
             kHeight / 2, kHeight / 2);
  for (int i = 0; i <= 4; ++i) {
    const double ve = ex.lo + (ex.hi - ex.lo) * i / 4.0, va = ay.lo + (ay.hi - ay.lo) * i / 4.0;
    fmt::print(os, "<text x=\"{:.1f}\" y=\"{}\" text-anchor=\"middle\" font-size=\"10\">{:.3g}</text>\n", x(ve),
               kHeight - kMargin + 15, ve);
    fmt::print(os, "<text x=\"{}\" y=\"{:.1f}\" text-anchor=\"end\" font-size=\"10\">{:.3g}</text>\n", kMargin - 5,
               y(va), va);
  }
  fmt::print(os, "<g id=\"points\">\n");
  for (std::size_t i = 0; i < records.size(); ++i) {
    const bool top = a[i] >= cutoff;
    fmt::print(os, "<circle class=\"{}\" cx=\"{:.2f}\" cy=\"{:.2f}\" r=\"3\" fill=\"{}\" fill-opacity=\"0.7\"/>\n",
               top ? "top" : "rest", x(e[i]), y(a[i]), top ? "#d62728" : "#1f77b4");
  }
  fmt::print(os, "</g>\n");
  const auto front = pareto_front(records);
  std::string pts;
  for (const auto& r : front) pts += fmt::format("{:.2f},{:.2f} ", x(r.energy_joules * 1e3), y(r.accuracy));
  if (!pts.empty()) pts.pop_back();
  fmt::print(os, "<polyline id=\"pareto\" points=\"{}\" fill=\"none\" stroke=\"black\" stroke-width=\"1.5\"/>\n", pts);
  fmt::print(os, "</svg>\n");
}

void write_front_csv(std::ostream& os, const std::vector<FitnessRecord>& front,
                     const std::map<std::string, double>* mean_fr) {
  os << "candidate," << (mean_fr != nullptr ? "fr," : "") << "energy_joules,energy_mj,accuracy,fitness\n";
  for (const auto& r : front) {
    const std::string cand = format_candidate(r.candidate);
    os << '"' << cand << "\",";
    if (mean_fr != nullptr) {
      const auto it = mean_fr->find(cand);
      if (it != mean_fr->end()) fmt::print(os, "{:.6f}", it->second);
      os << ',';
    }
    fmt::print(os, "{},{},{},{}\n", r.energy_joules, r.energy_joules * 1e3, r.accuracy, r.fitness);
  }
}

TauSummary tau_summary(const std::vector<FitnessRecord>& records, std::size_t top) {
  TauSummary s;
  auto tau = [](const std::vector<FitnessRecord>& rs) {
    std::vector<double> a, e;
    for (const auto& r : rs) {
      a.push_back(r.accuracy);
      e.push_back(r.energy_joules);
    }
    return kendall_tau(a, e);
  };
  s.all = tau(records);
  std::vector<FitnessRecord> best;
  for (std::size_t i : top_k(records, top)) best.push_back(records[i]);
  s.top_count = best.size();
  s.top = best.size() >= 2 ? tau(best) : 0.0;
  return s;
}

}  // namespace spikenas::cli
