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

#ifndef UQBENCH_BLACKBOX_EST_HPP_
#define UQBENCH_BLACKBOX_EST_HPP_

// Black-box estimators over sampled responses: semantic-class summaries,
// spectral and degree statistics of a pairwise relation graph, lexical
// baselines and the empirical self-evaluation frequency.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <optional>
#include <span>
#include <vector>

#include "uqbench/common.hpp"
#include "uqbench/sample_est.hpp"
#include "uqbench/text_metrics.hpp"
#include "uqbench/trace.hpp"

namespace uqbench::blackbox {

using Eigen::MatrixXd;
using Eigen::VectorXd;

enum class GraphMode { kNliEntail, kNliContra, kJaccard };

struct RelationGraph {
  MatrixXd weights;  // symmetric, entries in [0,1], unit diagonal
  GraphMode mode = GraphMode::kNliEntail;

  Eigen::Index size() const { return weights.rows(); }
};

/// Symmetrizes (W + W^T) / 2 and sets the diagonal to 1.
inline RelationGraph make_graph(MatrixXd w, GraphMode mode) {
  if (w.rows() != w.cols()) throw DataError("relation graph must be square");
  MatrixXd sym = 0.5 * (w + w.transpose());
  sym.diagonal().setOnes();
  return {std::move(sym), mode};
}

inline std::optional<RelationGraph> build_graph(const GenerationTrace& trace, GraphMode mode) {
  const auto n = static_cast<Eigen::Index>(trace.samples.size());
  if (n == 0) return std::nullopt;
  switch (mode) {
    case GraphMode::kNliEntail:
      if (!trace.relations || !trace.relations->entail) return std::nullopt;
      return make_graph(*trace.relations->entail, mode);
    case GraphMode::kNliContra:
      if (!trace.relations || !trace.relations->contra) return std::nullopt;
      return make_graph(MatrixXd::Ones(n, n) - *trace.relations->contra, mode);
    case GraphMode::kJaccard: {
      MatrixXd w(n, n);
      for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j)
          w(i, j) = text::jaccard(trace.samples[static_cast<std::size_t>(i)].text,
                                  trace.samples[static_cast<std::size_t>(j)].text);
      return make_graph(std::move(w), mode);
    }
  }
  return std::nullopt;
}

inline ScoreValue num_set(const sample::SemanticPartition& p) {
  if (p.classes.empty()) return ScoreValue::missing();
  return static_cast<double>(p.num_classes());
}

inline ScoreValue label_prob(const sample::SemanticPartition& p) {
  if (p.classes.empty()) return ScoreValue::missing();
  std::size_t total = 0;
  std::size_t largest = 0;
  for (const auto& c : p.classes) {
    total += c.size();
    largest = std::max(largest, c.size());
  }
  return 1.0 - static_cast<double>(largest) / static_cast<double>(total);
}

inline MatrixXd laplacian(const MatrixXd& w) {
  MatrixXd l = -w;
  l.diagonal() += w.rowwise().sum();
  return l;
}

inline MatrixXd normalized_laplacian(const MatrixXd& w) {
  const VectorXd inv_sqrt = w.rowwise().sum().array().rsqrt();
  MatrixXd l = -(inv_sqrt.asDiagonal() * w * inv_sqrt.asDiagonal());
  l.diagonal().array() += 1.0;
  return 0.5 * (l + l.transpose());
}

/// Von Neumann entropy of the unit-trace heat kernel exp(-tL).
inline ScoreValue kle(const RelationGraph& g, double t = 0.3) {
  if (g.size() == 0) return ScoreValue::missing();
  if (!(t > 0.0)) throw ConfigError("kle: diffusion time must be positive");
  Eigen::SelfAdjointEigenSolver<MatrixXd> solver(laplacian(g.weights), Eigen::EigenvaluesOnly);
  const VectorXd heat = (-t * solver.eigenvalues().array()).exp();
  const VectorXd lambda = heat / heat.sum();
  double h = 0.0;
  for (Eigen::Index k = 0; k < lambda.size(); ++k)
    if (lambda(k) >= 1e-15) h -= lambda(k) * std::log(lambda(k));
  return h;
}

/// Sum of max(0, 1 - lambda) over the normalized-Laplacian spectrum.
inline ScoreValue eig_val_laplacian(const RelationGraph& g) {
  if (g.size() == 0) return ScoreValue::missing();
  Eigen::SelfAdjointEigenSolver<MatrixXd> solver(normalized_laplacian(g.weights),
                                                 Eigen::EigenvaluesOnly);
  double s = 0.0;
  for (Eigen::Index k = 0; k < solver.eigenvalues().size(); ++k)
    s += std::max(0.0, 1.0 - solver.eigenvalues()(k));
  return s;
}

struct EccentricityConfig {
  // Number of eigenvectors; 0 keeps every eigenvalue below `threshold`.
  int k = 0;
  double threshold = 0.9;
};

/// Normalized-Laplacian eigenvectors for the `k` smallest eigenvalues, in a
/// deterministic basis: each vector's largest-magnitude entry is positive,
/// and vectors of numerically equal eigenvalues are ordered
/// lexicographically.
inline std::pair<VectorXd, MatrixXd> spectral_basis(const MatrixXd& w) {
  Eigen::SelfAdjointEigenSolver<MatrixXd> solver(normalized_laplacian(w));
  VectorXd vals = solver.eigenvalues();
  MatrixXd vecs = solver.eigenvectors();
  const auto n = vals.size();
  for (Eigen::Index c = 0; c < n; ++c) {
    Eigen::Index arg = 0;
    vecs.col(c).cwiseAbs().maxCoeff(&arg);
    // Break magnitude ties toward the lowest index.
    const double top = std::abs(vecs(arg, c));
    for (Eigen::Index i = 0; i < n; ++i)
      if (std::abs(std::abs(vecs(i, c)) - top) <= 1e-12) {
        arg = i;
        break;
      }
    if (vecs(arg, c) < 0) vecs.col(c) = -vecs.col(c);
  }
  Eigen::Index start = 0;
  while (start < n) {
    Eigen::Index end = start + 1;
    while (end < n && std::abs(vals(end) - vals(start)) <= 1e-10) ++end;
    std::vector<VectorXd> group;
    for (Eigen::Index c = start; c < end; ++c) group.push_back(vecs.col(c));
    std::sort(group.begin(), group.end(), [](const VectorXd& a, const VectorXd& b) {
      return std::lexicographical_compare(a.data(), a.data() + a.size(), b.data(), b.data() + b.size());
    });
    for (Eigen::Index c = start; c < end; ++c) vecs.col(c) = group[static_cast<std::size_t>(c - start)];
    start = end;
  }
  return {std::move(vals), std::move(vecs)};
}

/// Spread of the spectral embeddings around their centroid.
inline ScoreValue eccentricity(const RelationGraph& g, const EccentricityConfig& cfg = {}) {
  const auto n = g.size();
  if (n == 0) return ScoreValue::missing();
  if (cfg.k > n) throw ConfigError("eccentricity: k exceeds the number of samples");
  const auto [vals, vecs] = spectral_basis(g.weights);
  Eigen::Index k = cfg.k;
  if (k <= 0) {
    k = 0;
    for (Eigen::Index i = 0; i < n; ++i)
      if (vals(i) < cfg.threshold) ++k;
    k = std::max<Eigen::Index>(k, 1);
  }
  const MatrixXd emb = vecs.leftCols(k);  // row i = v_i
  const MatrixXd centered = emb.rowwise() - emb.colwise().mean();
  return std::sqrt(centered.squaredNorm());
}

/// Mean missing pairwise similarity.
inline ScoreValue degmat(const RelationGraph& g) {
  const double n = static_cast<double>(g.size());
  if (n == 0) return ScoreValue::missing();
  return (n * n - g.weights.sum()) / (n * n);
}

/// One minus the mean off-diagonal soft entailment confidence.
inline ScoreValue luq(const MatrixXd& soft_entail) {
  const auto n = soft_entail.rows();
  if (n < 2 || soft_entail.cols() != n) return ScoreValue::missing();
  const double off = soft_entail.sum() - soft_entail.trace();
  return 1.0 - off / static_cast<double>(n * (n - 1));
}

enum class LexicalMetric { kRougeL, kBleu };

/// Negated mean pairwise similarity over unordered sample pairs.
inline ScoreValue lexical_similarity(std::span<const SampleRecord> samples, LexicalMetric metric) {
  const std::size_t n = samples.size();
  if (n < 2) return ScoreValue::missing();
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      sum += metric == LexicalMetric::kRougeL ? text::rouge_l(samples[i].text, samples[j].text)
                                              : text::bleu_symmetric(samples[i].text, samples[j].text);
  return -2.0 * sum / static_cast<double>(n * (n - 1));
}

inline ScoreValue ptrue_empirical(const std::optional<ReflexiveRecord>& record) {
  if (!record || !record->empirical_true_flags || record->empirical_true_flags->empty())
    return ScoreValue::missing();
  const auto& flags = *record->empirical_true_flags;
  const auto yes = std::count(flags.begin(), flags.end(), true);
  return 1.0 - static_cast<double>(yes) / static_cast<double>(flags.size());
}

}  // namespace uqbench::blackbox

#endif  // UQBENCH_BLACKBOX_EST_HPP_
