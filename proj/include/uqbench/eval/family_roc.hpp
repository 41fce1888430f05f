// Copyright 2026 The uqbench Authors.
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

#ifndef UQBENCH_EVAL_FAMILY_ROC_HPP_
#define UQBENCH_EVAL_FAMILY_ROC_HPP_

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <map>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "uqbench/common.hpp"

namespace uqbench::eval {

inline constexpr std::size_t kRocGridPoints = 101;

/// FPR grid 0, 0.01, ..., 1. Points are formed as i/100 so they compare
/// exactly with rationals fp/N that denote the same value.
inline std::vector<double> roc_grid() {
  std::vector<double> g(kRocGridPoints);
  for (std::size_t i = 0; i < kRocGridPoints; ++i) g[i] = static_cast<double>(i) / 100.0;
  return g;
}

struct RocPoint {
  double fpr;
  double tpr;
};

/// Empirical ROC with positives = label 1 and higher score = more likely
/// positive. Tied scores produce a single diagonal step. Empty when a class
/// is absent.
inline std::vector<RocPoint> roc_curve(std::span<const double> scores, std::span<const int> labels) {
  const std::size_t n = scores.size();
  if (n != labels.size()) throw DataError("roc_curve: scores and labels differ in length");
  std::size_t pos = 0;
  for (int l : labels) pos += l ? 1 : 0;
  const std::size_t neg = n - pos;
  if (pos == 0 || neg == 0) return {};
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
  std::vector<RocPoint> pts{{0.0, 0.0}};
  std::size_t tp = 0, fp = 0;
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j < n && scores[order[j]] == scores[order[i]]) {
      if (labels[order[j]]) ++tp; else ++fp;
      ++j;
    }
    pts.push_back({static_cast<double>(fp) / static_cast<double>(neg),
                   static_cast<double>(tp) / static_cast<double>(pos)});
    i = j;
  }
  return pts;
}

/// Samples a ROC curve at each grid FPR. On a vertical segment the upper TPR
/// is taken; elsewhere TPR is linearly interpolated.
inline std::vector<double> interpolate_roc(const std::vector<RocPoint>& pts, std::span<const double> grid) {
  std::vector<double> out(grid.size());
  for (std::size_t g = 0; g < grid.size(); ++g) {
    const double x = grid[g];
    // last point with fpr <= x
    std::size_t k = 0;
    while (k + 1 < pts.size() && pts[k + 1].fpr <= x) ++k;
    if (pts[k].fpr == x || k + 1 == pts.size()) {
      out[g] = pts[k].tpr;
    } else {
      const auto& a = pts[k];
      const auto& b = pts[k + 1];
      out[g] = a.tpr + (b.tpr - a.tpr) * (x - a.fpr) / (b.fpr - a.fpr);
    }
  }
  return out;
}

struct MeanCurve {
  std::vector<double> fpr;
  std::vector<double> mean_tpr;
  std::vector<double> std_tpr;  // population std across members
  std::size_t members = 0;
};

/// Pointwise mean and population std of curves sampled on the same grid.
inline MeanCurve average_curves(const std::vector<std::vector<double>>& curves) {
  MeanCurve out;
  out.fpr = roc_grid();
  out.members = curves.size();
  out.mean_tpr.assign(kRocGridPoints, 0.0);
  out.std_tpr.assign(kRocGridPoints, 0.0);
  if (curves.empty()) return out;
  const double m = static_cast<double>(curves.size());
  for (std::size_t g = 0; g < kRocGridPoints; ++g) {
    double s = 0.0;
    for (const auto& c : curves) s += c[g];
    const double mean = s / m;
    double ss = 0.0;
    for (const auto& c : curves) ss += (c[g] - mean) * (c[g] - mean);
    out.mean_tpr[g] = mean;
    out.std_tpr[g] = std::sqrt(ss / m);
  }
  return out;
}

/// Per-family mean ROC. `values` holds one row per estimator (NaN =
/// missing, excluded per estimator); `families[i]` names row i's family.
/// Families without any defined ROC are omitted.
inline std::map<std::string, MeanCurve> family_roc_aggregate(const std::vector<std::vector<double>>& values,
                                                             const std::vector<std::string>& families,
                                                             std::span<const int> labels) {
  if (values.size() != families.size()) throw DataError("family_roc: family list length mismatch");
  const auto grid = roc_grid();
  std::map<std::string, std::vector<std::vector<double>>> grouped;
  std::vector<double> s;
  std::vector<int> l;
  for (std::size_t e = 0; e < values.size(); ++e) {
    if (values[e].size() != labels.size()) throw DataError("family_roc: row length mismatch");
    s.clear();
    l.clear();
    for (std::size_t i = 0; i < labels.size(); ++i)
      if (!std::isnan(values[e][i])) {
        s.push_back(values[e][i]);
        l.push_back(labels[i]);
      }
    const auto pts = roc_curve(s, l);
    if (pts.empty()) continue;
    grouped[families[e]].push_back(interpolate_roc(pts, grid));
  }
  std::map<std::string, MeanCurve> out;
  for (const auto& [family, curves] : grouped) out.emplace(family, average_curves(curves));
  return out;
}

/// Second-level aggregate: for each family, mean (and population std) of
/// the per-panel family means across the panels where the family appears.
inline std::map<std::string, MeanCurve> aggregate_panels(
    const std::vector<std::map<std::string, MeanCurve>>& panels) {
  std::map<std::string, std::vector<std::vector<double>>> grouped;
  for (const auto& panel : panels)
    for (const auto& [family, curve] : panel) grouped[family].push_back(curve.mean_tpr);
  std::map<std::string, MeanCurve> out;
  for (const auto& [family, curves] : grouped) out.emplace(family, average_curves(curves));
  return out;
}

}  // namespace uqbench::eval

#endif  // UQBENCH_EVAL_FAMILY_ROC_HPP_
