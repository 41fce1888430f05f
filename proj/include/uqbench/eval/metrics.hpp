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

#ifndef UQBENCH_EVAL_METRICS_HPP_
#define UQBENCH_EVAL_METRICS_HPP_

// Discrimination (AUROC), selective prediction (PRR) and rank calibration
// (RCE) of uncertainty scores against response quality.

#include <algorithm>
#include <cmath>
#include <numeric>
#include <span>
#include <vector>

#include "uqbench/common.hpp"

namespace uqbench::eval {

/// 1 = hallucinated (positive class) iff quality < threshold.
inline std::vector<int> binarize_quality(std::span<const double> quality, double threshold = 0.5) {
  std::vector<int> out;
  out.reserve(quality.size());
  for (double q : quality) out.push_back(q < threshold ? 1 : 0);
  return out;
}

/// 1-based average ranks; tied values share the mean of their positions.
inline std::vector<double> average_ranks(std::span<const double> x) {
  const std::size_t n = x.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return x[a] < x[b]; });
  std::vector<double> ranks(n);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i + 1;
    while (j < n && x[order[j]] == x[order[i]]) ++j;
    const double r = 0.5 * static_cast<double>(i + 1 + j);
    for (std::size_t k = i; k < j; ++k) ranks[order[k]] = r;
    i = j;
  }
  return ranks;
}

/// Probability that a random positive scores above a random negative, ties
/// counted one half. Missing when only one class is present.
inline ScoreValue auroc(std::span<const double> scores, std::span<const int> labels) {
  if (scores.size() != labels.size()) throw DataError("auroc: scores and labels differ in length");
  const auto ranks = average_ranks(scores);
  double pos = 0.0;
  double rank_sum = 0.0;
  for (std::size_t i = 0; i < ranks.size(); ++i)
    if (labels[i]) {
      pos += 1.0;
      rank_sum += ranks[i];
    }
  const double neg = static_cast<double>(scores.size()) - pos;
  if (pos == 0.0 || neg == 0.0) return ScoreValue::missing();
  return (rank_sum - pos * (pos + 1.0) / 2.0) / (pos * neg);
}

namespace detail {

// Area under the retained-quality curve over rejection counts 0..n-1 with
// rejection-rate spacing 1/n. `prefix_sum(m)` is the (expected) quality sum of
// the m retained instances.
template <typename PrefixSum>
double retention_auc(std::size_t n, PrefixSum prefix_sum) {
  double auc = 0.0;
  double prev = prefix_sum(n) / static_cast<double>(n);
  for (std::size_t k = 1; k < n; ++k) {
    const std::size_t m = n - k;
    const double cur = prefix_sum(m) / static_cast<double>(m);
    auc += 0.5 * (prev + cur);
    prev = cur;
  }
  return auc / static_cast<double>(n);
}

}  // namespace detail

/// Prediction-rejection ratio. Instances are retained lowest uncertainty
/// first; inside a group of tied scores the retained quality is the group
/// mean (the expectation over random tie orderings).
inline ScoreValue prr(std::span<const double> scores, std::span<const double> quality) {
  const std::size_t n = scores.size();
  if (n != quality.size()) throw DataError("prr: scores and quality differ in length");
  if (n < 2) return ScoreValue::missing();

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
  // Tie groups in retention order: [start, end) with their mean quality.
  std::vector<std::size_t> group_end(n);
  std::vector<double> group_mean(n);
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i + 1;
    while (j < n && scores[order[j]] == scores[order[i]]) ++j;
    double s = 0.0;
    for (std::size_t k = i; k < j; ++k) s += quality[order[k]];
    for (std::size_t k = i; k < j; ++k) {
      group_end[k] = j;
      group_mean[k] = s / static_cast<double>(j - i);
    }
    i = j;
  }
  std::vector<double> cum(n + 1, 0.0);  // cumulative group-mean sums
  for (std::size_t k = 0; k < n; ++k) cum[k + 1] = cum[k] + group_mean[k];
  const double auc_u = detail::retention_auc(n, [&](std::size_t m) { return cum[m]; });

  std::vector<double> sorted_q(quality.begin(), quality.end());
  std::sort(sorted_q.begin(), sorted_q.end(), std::greater<>());
  std::vector<double> oracle_cum(n + 1, 0.0);
  for (std::size_t k = 0; k < n; ++k) oracle_cum[k + 1] = oracle_cum[k] + sorted_q[k];
  const double auc_oracle = detail::retention_auc(n, [&](std::size_t m) { return oracle_cum[m]; });

  const double mean = oracle_cum[n] / static_cast<double>(n);
  const double auc_random = mean * static_cast<double>(n - 1) / static_cast<double>(n);
  const double denom = auc_oracle - auc_random;
  if (!(std::abs(denom) > 1e-15 * std::max(1.0, std::abs(auc_oracle)))) return ScoreValue::missing();
  return (auc_u - auc_random) / denom;
}

/// Binned rank-calibration error. Instances are sorted by uncertainty into B
/// equal-count bins; each bin compares its mean relative quality rank with
/// one minus its mean relative uncertainty rank. 0 means quality rank is
/// perfectly anti-aligned with uncertainty rank.
inline ScoreValue rce(std::span<const double> scores, std::span<const double> quality,
                      std::size_t bins = 20) {
  const std::size_t n = scores.size();
  if (n != quality.size()) throw DataError("rce: scores and quality differ in length");
  if (bins < 2) throw ConfigError("rce: at least 2 bins required");
  if (n < bins) throw DataError("rce: fewer instances than bins");
  const auto ur = average_ranks(scores);
  const auto qr = average_ranks(quality);
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
  const double nd = static_cast<double>(n);
  double total = 0.0;
  for (std::size_t b = 0; b < bins; ++b) {
    const std::size_t lo = b * n / bins;
    const std::size_t hi = (b + 1) * n / bins;
    double u = 0.0;
    double q = 0.0;
    for (std::size_t k = lo; k < hi; ++k) {
      u += (ur[order[k]] - 0.5) / nd;
      q += (qr[order[k]] - 0.5) / nd;
    }
    const double cnt = static_cast<double>(hi - lo);
    total += std::abs(q / cnt - (1.0 - u / cnt));
  }
  return total / static_cast<double>(bins);
}

}  // namespace uqbench::eval

#endif  // UQBENCH_EVAL_METRICS_HPP_
