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

#ifndef UQBENCH_EVAL_REDUNDANCY_HPP_
#define UQBENCH_EVAL_REDUNDANCY_HPP_

// Redundancy analyses: rank correlation between estimator scores, Kendall
// agreement between per-panel performance profiles, and average-linkage
// clustering of the resulting correlation matrices.
//
// Matrices use NaN for cells that are undefined (too little overlap, or a
// constant input).

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "uqbench/common.hpp"
#include "uqbench/eval/metrics.hpp"

namespace uqbench::eval {

inline constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

inline bool is_missing(double v) { return std::isnan(v); }

/// Pearson correlation; missing when either side is constant.
inline ScoreValue pearson(std::span<const double> x, std::span<const double> y) {
  const std::size_t n = x.size();
  const double nd = static_cast<double>(n);
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / nd;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / nd;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx <= 0.0 || syy <= 0.0) return ScoreValue::missing();
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

/// Spearman's rho: Pearson correlation of average ranks.
inline ScoreValue spearman(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw DataError("spearman: length mismatch");
  const auto rx = average_ranks(x);
  const auto ry = average_ranks(y);
  return pearson(rx, ry);
}

/// Pairwise Spearman matrix over the rows of `values` (estimators x
/// instances, NaN = missing). Each cell uses the instances both rows
/// define and needs at least `min_overlap` of them.
inline Eigen::MatrixXd spearman_matrix(const std::vector<std::vector<double>>& values,
                                       std::size_t min_overlap = 3) {
  const std::size_t m = values.size();
  Eigen::MatrixXd out = Eigen::MatrixXd::Constant(m, m, kNaN);
  std::vector<double> a, b;
  for (std::size_t i = 0; i < m; ++i) {
    out(i, i) = 1.0;
    for (std::size_t j = i + 1; j < m; ++j) {
      if (values[i].size() != values[j].size()) throw DataError("spearman_matrix: ragged rows");
      a.clear();
      b.clear();
      for (std::size_t k = 0; k < values[i].size(); ++k)
        if (!is_missing(values[i][k]) && !is_missing(values[j][k])) {
          a.push_back(values[i][k]);
          b.push_back(values[j][k]);
        }
      if (a.size() < min_overlap) continue;
      const auto rho = spearman(a, b);
      if (rho) out(i, j) = out(j, i) = rho.value();
    }
  }
  return out;
}

namespace detail {

// Number of pairs sharing a value within each run of equal adjacent values.
inline std::int64_t tied_pairs(const std::vector<double>& sorted) {
  std::int64_t total = 0;
  std::int64_t run = 1;
  for (std::size_t i = 1; i <= sorted.size(); ++i) {
    if (i < sorted.size() && sorted[i] == sorted[i - 1]) {
      ++run;
    } else {
      total += run * (run - 1) / 2;
      run = 1;
    }
  }
  return total;
}

// Merge sort counting inversions (strictly greater element before a
// smaller one).
inline std::int64_t count_swaps(std::vector<double>& v, std::vector<double>& buf, std::size_t lo,
                                std::size_t hi) {
  if (hi - lo < 2) return 0;
  const std::size_t mid = lo + (hi - lo) / 2;
  std::int64_t swaps = count_swaps(v, buf, lo, mid) + count_swaps(v, buf, mid, hi);
  std::size_t i = lo, j = mid, k = lo;
  while (i < mid && j < hi) {
    if (v[j] < v[i]) {
      swaps += static_cast<std::int64_t>(mid - i);
      buf[k++] = v[j++];
    } else {
      buf[k++] = v[i++];
    }
  }
  while (i < mid) buf[k++] = v[i++];
  while (j < hi) buf[k++] = v[j++];
  std::copy(buf.begin() + static_cast<std::ptrdiff_t>(lo), buf.begin() + static_cast<std::ptrdiff_t>(hi),
            v.begin() + static_cast<std::ptrdiff_t>(lo));
  return swaps;
}

}  // namespace detail

/// Kendall's tau-b in O(n log n) (Knight's algorithm). Missing when either
/// input is constant or shorter than 2.
inline ScoreValue kendall_tau_b(std::span<const double> x, std::span<const double> y) {
  const std::size_t n = x.size();
  if (n != y.size()) throw DataError("kendall: length mismatch");
  if (n < 2) return ScoreValue::missing();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return x[a] < x[b] || (x[a] == x[b] && y[a] < y[b]);
  });
  std::vector<double> xs(n), ys(n);
  for (std::size_t k = 0; k < n; ++k) {
    xs[k] = x[order[k]];
    ys[k] = y[order[k]];
  }
  const std::int64_t n0 = static_cast<std::int64_t>(n) * static_cast<std::int64_t>(n - 1) / 2;
  const std::int64_t n1 = detail::tied_pairs(xs);
  std::int64_t n3 = 0;  // pairs tied in both
  for (std::size_t i = 0, run = 1; i < n; ++i) {
    if (i + 1 < n && xs[i + 1] == xs[i] && ys[i + 1] == ys[i]) {
      ++run;
    } else {
      n3 += static_cast<std::int64_t>(run * (run - 1) / 2);
      run = 1;
    }
  }
  std::vector<double> buf(n);
  const std::int64_t swaps = detail::count_swaps(ys, buf, 0, n);
  const std::int64_t n2 = detail::tied_pairs(ys);
  if (n0 == n1 || n0 == n2) return ScoreValue::missing();
  const double num = static_cast<double>(n0 - n1 - n2 + n3 - 2 * swaps);
  const double den = std::sqrt(static_cast<double>(n0 - n1)) * std::sqrt(static_cast<double>(n0 - n2));
  return std::clamp(num / den, -1.0, 1.0);
}

/// Kendall tau-b between performance profiles (rows: estimators, columns:
/// panels, NaN = missing). Cells use panels both rows define.
inline Eigen::MatrixXd kendall_profiles(const std::vector<std::vector<double>>& profiles) {
  const std::size_t m = profiles.size();
  Eigen::MatrixXd out = Eigen::MatrixXd::Constant(m, m, kNaN);
  std::vector<double> a, b;
  for (std::size_t i = 0; i < m; ++i) {
    out(i, i) = 1.0;
    for (std::size_t j = i + 1; j < m; ++j) {
      if (profiles[i].size() != profiles[j].size()) throw DataError("kendall_profiles: ragged rows");
      a.clear();
      b.clear();
      for (std::size_t k = 0; k < profiles[i].size(); ++k)
        if (!is_missing(profiles[i][k]) && !is_missing(profiles[j][k])) {
          a.push_back(profiles[i][k]);
          b.push_back(profiles[j][k]);
        }
      const auto tau = kendall_tau_b(a, b);
      if (tau) out(i, j) = out(j, i) = tau.value();
    }
  }
  return out;
}

/// One agglomeration step. Leaves are 0..n-1; the cluster created by merge
/// i has id n+i (the usual linkage-matrix convention).
struct Merge {
  std::size_t left = 0;
  std::size_t right = 0;
  double distance = 0.0;
  std::size_t size = 0;
};

/// Average-linkage clustering under distance 1 - rho. Among equally close
/// pairs the one with the lowest (left, right) cluster ids merges first.
/// Undefined correlations are treated as rho = 0 (distance 1), with a
/// warning.
inline std::vector<Merge> hcluster(const Eigen::MatrixXd& corr) {
  if (corr.rows() != corr.cols()) throw DataError("hcluster: correlation matrix is not square");
  const std::size_t n = static_cast<std::size_t>(corr.rows());
  std::vector<Merge> merges;
  if (n < 2) return merges;

  const std::size_t total = 2 * n - 1;
  Eigen::MatrixXd dist = Eigen::MatrixXd::Zero(total, total);
  bool had_missing = false;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j) continue;
      double rho = corr(i, j);
      if (is_missing(rho)) {
        had_missing = true;
        rho = 0.0;
      }
      dist(i, j) = 1.0 - rho;
    }
  if (had_missing) warn("hcluster: undefined correlations treated as distance 1");

  std::vector<std::size_t> active(n);
  std::iota(active.begin(), active.end(), 0);
  std::vector<std::size_t> size(total, 1);
  merges.reserve(n - 1);
  for (std::size_t step = 0; step + 1 < n; ++step) {
    std::size_t ba = 0, bb = 1;
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t p = 0; p < active.size(); ++p)
      for (std::size_t q = p + 1; q < active.size(); ++q) {
        const double d = dist(active[p], active[q]);
        if (d < best) {
          best = d;
          ba = p;
          bb = q;
        }
      }
    const std::size_t a = active[ba];
    const std::size_t b = active[bb];
    const std::size_t c = n + step;
    size[c] = size[a] + size[b];
    const double wa = static_cast<double>(size[a]);
    const double wb = static_cast<double>(size[b]);
    for (std::size_t k : active) {
      if (k == a || k == b) continue;
      const double d = (wa * dist(a, k) + wb * dist(b, k)) / (wa + wb);
      dist(c, k) = dist(k, c) = d;
    }
    merges.push_back({a, b, best, size[c]});
    active.erase(active.begin() + static_cast<std::ptrdiff_t>(bb));
    active.erase(active.begin() + static_cast<std::ptrdiff_t>(ba));
    active.push_back(c);
  }
  return merges;
}

}  // namespace uqbench::eval

#endif  // UQBENCH_EVAL_REDUNDANCY_HPP_
