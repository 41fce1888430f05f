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

#ifndef UQBENCH_SAMPLE_EST_HPP_
#define UQBENCH_SAMPLE_EST_HPP_

// Sample-dispersion estimators over the shared pool of S sampled responses.

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <span>
#include <vector>

#include "uqbench/common.hpp"
#include "uqbench/trace.hpp"

namespace uqbench::sample {

using Samples = std::span<const SampleRecord>;

/// Monte Carlo sequence entropy, optionally length-normalized per sample.
inline ScoreValue mc_entropy(Samples samples, bool normalized) {
  if (samples.empty()) return ScoreValue::missing();
  double sum = 0.0;
  for (const auto& s : samples) {
    if (s.token_logprobs.empty()) throw DataError("mc_entropy: zero-length sample");
    const double lp = s.log_prob();
    sum += normalized ? lp / static_cast<double>(s.token_logprobs.size()) : lp;
  }
  return -sum / static_cast<double>(samples.size());
}

struct SemanticPartition {
  // Each class lists sample indices in ascending order; classes are ordered
  // by their smallest member.
  std::vector<std::vector<int>> classes;

  std::size_t num_classes() const { return classes.size(); }
};

/// Connected components of the mutual-entailment graph.
inline SemanticPartition cluster_semantic(const BoolMatrix& bidir) {
  const int n = static_cast<int>(bidir.rows());
  if (bidir.cols() != n) throw DataError("cluster_semantic: matrix must be square");
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      if (bidir(i, j) != bidir(j, i))
        throw DataError("cluster_semantic: bidirectional entailment matrix is asymmetric");

  std::vector<int> parent(static_cast<std::size_t>(n));
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](int x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      if (bidir(i, j)) {
        const int a = find(i);
        const int b = find(j);
        if (a != b) parent[std::max(a, b)] = std::min(a, b);
      }

  SemanticPartition out;
  std::vector<int> slot(static_cast<std::size_t>(n), -1);
  for (int i = 0; i < n; ++i) {
    const int root = find(i);
    if (slot[root] < 0) {
      slot[root] = static_cast<int>(out.classes.size());
      out.classes.emplace_back();
    }
    out.classes[slot[root]].push_back(i);
  }
  return out;
}

inline SemanticPartition cluster_semantic(const RelationMatrices& relations) {
  if (!relations.bidir_entail_label) throw DataError("cluster_semantic: bidir_entail_label absent");
  return cluster_semantic(*relations.bidir_entail_label);
}

inline double log_sum_exp(std::span<const double> xs) {
  double hi = -std::numeric_limits<double>::infinity();
  for (double x : xs) hi = std::max(hi, x);
  if (!std::isfinite(hi)) return hi;
  double acc = 0.0;
  for (double x : xs) acc += std::exp(x - hi);
  return hi + std::log(acc);
}

/// Entropy of the class-probability distribution. Class masses are
/// accumulated in log space.
inline ScoreValue semantic_entropy(const SemanticPartition& partition, Samples samples) {
  if (samples.empty() || partition.classes.empty()) return ScoreValue::missing();
  std::vector<double> all;
  all.reserve(samples.size());
  for (const auto& s : samples) all.push_back(s.log_prob());
  const double log_total = log_sum_exp(all);
  double h = 0.0;
  for (const auto& cls : partition.classes) {
    std::vector<double> members;
    for (int idx : cls) members.push_back(all.at(static_cast<std::size_t>(idx)));
    const double log_p = log_sum_exp(members) - log_total;
    const double p = std::exp(log_p);
    if (p > 0.0) h -= p * log_p;
  }
  return h;
}

inline double length_normalized_prob(const SampleRecord& s) {
  if (s.token_logprobs.empty()) throw DataError("zero-length sample");
  return std::exp(s.log_prob() / static_cast<double>(s.token_logprobs.size()));
}

/// Negated probability-weighted kernel density around the greedy response.
inline ScoreValue semantic_density(Samples samples, std::span<const double> kernel_scores,
                                   double greedy_lnp) {
  if (samples.size() != kernel_scores.size())
    throw DataError("semantic_density: one kernel score per sample required");
  double num = greedy_lnp;
  double den = greedy_lnp;
  for (std::size_t s = 0; s < samples.size(); ++s) {
    const double p = length_normalized_prob(samples[s]);
    num += p * kernel_scores[s];
    den += p;
  }
  if (!(den > 0.0)) return ScoreValue::missing();
  return -num / den;
}

/// (1/S) sum_s -log(P_s + (1/tau) sum_{j != s} P_j sim_sj).
inline ScoreValue sentence_sar(std::span<const double> probs, const Eigen::MatrixXd& sim,
                               double tau = 1.0) {
  const auto n = static_cast<Eigen::Index>(probs.size());
  if (n == 0) return ScoreValue::missing();
  if (sim.rows() != n || sim.cols() != n) throw DataError("sentence_sar: similarity must be SxS");
  if (!(tau > 0.0)) throw ConfigError("sentence_sar: tau must be positive");
  double total = 0.0;
  for (Eigen::Index s = 0; s < n; ++s) {
    double support = 0.0;
    for (Eigen::Index j = 0; j < n; ++j)
      if (j != s) support += probs[static_cast<std::size_t>(j)] * sim(s, j);
    total -= safe_log(probs[static_cast<std::size_t>(s)] + support / tau);
  }
  return total / static_cast<double>(n);
}

inline ScoreValue sentence_sar(Samples samples, const Eigen::MatrixXd& sim, double tau = 1.0) {
  std::vector<double> probs;
  for (const auto& s : samples) probs.push_back(std::exp(s.log_prob()));
  return sentence_sar(probs, sim, tau);
}

/// SentenceSAR with TokenSAR-adjusted sample probabilities.
inline ScoreValue sar(Samples samples, const Eigen::MatrixXd& sim, double tau = 1.0) {
  std::vector<double> probs;
  for (const auto& s : samples) {
    if (!s.tokensar_logprobs) return ScoreValue::missing();
    double lp = 0.0;
    for (double x : *s.tokensar_logprobs) lp += x;
    probs.push_back(std::exp(lp));
  }
  return sentence_sar(probs, sim, tau);
}

/// Base uncertainty times mean dissimilarity over the full KxK matrix,
/// diagonal included.
inline ScoreValue cocoa(ScoreValue base, const Eigen::MatrixXd& sent_sim) {
  if (!base || sent_sim.size() == 0) return ScoreValue::missing();
  const double k = static_cast<double>(sent_sim.rows());
  const double dissim = (1.0 - sent_sim.array()).sum() / (k * k);
  return base.value() * dissim;
}

}  // namespace uqbench::sample

#endif  // UQBENCH_SAMPLE_EST_HPP_
