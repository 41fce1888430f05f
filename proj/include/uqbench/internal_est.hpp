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

#ifndef UQBENCH_INTERNAL_EST_HPP_
#define UQBENCH_INTERNAL_EST_HPP_

// Attention- and hidden-state estimators.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <span>
#include <vector>

#include "uqbench/common.hpp"
#include "uqbench/logit_est.hpp"
#include "uqbench/trace.hpp"

namespace uqbench::internal {

/// Attention slices consumed by the internal-state estimators.
struct AttentionExtract {
  int layers = 0;
  int heads = 0;
  // H x T diagonal self-attention at the middle layer.
  Eigen::MatrixXd middle_layer_diag;
  // Middle-third layer index -> H x T attention to the previous position.
  std::map<int, Eigen::MatrixXd> prev_attn;
  // Mean attention each position receives from the final step.
  Eigen::VectorXd from_last;
};

/// Middle layer, floor(L/2) in 0-based indexing.
inline int middle_layer(int layers) { return layers / 2; }

/// Layer indices floor(L/3) .. ceil(2L/3), clamped to the model depth.
inline std::vector<int> middle_third(int layers) {
  const int lo = layers / 3;
  const int hi = std::min(layers - 1, (2 * layers + 2) / 3);
  std::vector<int> out;
  for (int l = lo; l <= hi; ++l) out.push_back(l);
  return out;
}

inline std::optional<AttentionExtract> extract_attention(const GenerationTrace& trace) {
  if (!require(trace, Capability::kAttention)) return std::nullopt;
  const int L = trace.attention->layers;
  const int H = trace.attention->heads;
  const auto T = static_cast<Eigen::Index>(trace.response.size());
  AttentionExtract ex;
  ex.layers = L;
  ex.heads = H;
  ex.middle_layer_diag.resize(H, T);
  ex.from_last.resize(T);
  const int mid = middle_layer(L);
  for (Eigen::Index t = 0; t < T; ++t) {
    const auto& step = trace.response[static_cast<std::size_t>(t)];
    for (int h = 0; h < H; ++h) ex.middle_layer_diag(h, t) = (*step.attn_diag)[mid * H + h];
    ex.from_last(t) = *step.attn_from_last;
  }
  for (int l : middle_third(L)) {
    Eigen::MatrixXd m(H, T);
    for (Eigen::Index t = 0; t < T; ++t)
      for (int h = 0; h < H; ++h)
        m(h, t) = (*trace.response[static_cast<std::size_t>(t)].attn_prev)[l * H + h];
    ex.prev_attn.emplace(l, std::move(m));
  }
  return ex;
}

inline ScoreValue attention_score(const AttentionExtract& ex, double eps = 1e-12) {
  const auto H = ex.middle_layer_diag.rows();
  if (H == 0 || ex.middle_layer_diag.cols() == 0) return ScoreValue::missing();
  double sum = 0.0;
  for (Eigen::Index h = 0; h < H; ++h)
    for (Eigen::Index t = 0; t < ex.middle_layer_diag.cols(); ++t)
      sum += std::log(ex.middle_layer_diag(h, t) + eps);
  return -sum / static_cast<double>(H);
}

/// Recurrent attention-weighted confidence; worst layer over the middle third.
/// At T = 1 every layer scores 1 - log p_1.
inline ScoreValue rauq(std::span<const TokenStep> steps, const AttentionExtract& ex,
                       double alpha = 0.5) {
  const auto T = static_cast<Eigen::Index>(steps.size());
  if (T == 0 || ex.prev_attn.empty()) return ScoreValue::missing();
  double worst = -std::numeric_limits<double>::infinity();
  for (const auto& [layer, prev] : ex.prev_attn) {
    if (prev.cols() != T) throw DataError("rauq: attention length differs from response length");
    Eigen::Index head = 0;
    if (T >= 2) {
      double best = -1.0;
      for (Eigen::Index h = 0; h < prev.rows(); ++h) {
        const double mean = prev.row(h).segment(1, T - 1).mean();
        if (mean > best) {
          best = mean;
          head = h;
        }
      }
    }
    double c = std::exp(steps[0].logprob_cond);
    double log_sum = safe_log(c);
    for (Eigen::Index t = 1; t < T; ++t) {
      const double p = std::exp(steps[static_cast<std::size_t>(t)].logprob_cond);
      c = alpha * p + (1.0 - alpha) * prev(head, t) * c;
      log_sum += safe_log(c);
    }
    worst = std::max(worst, 1.0 - log_sum / static_cast<double>(T));
  }
  return worst;
}

/// NLL weighted by the attention each token receives from the final step.
inline ScoreValue csl(std::span<const TokenStep> steps, const AttentionExtract& ex) {
  const auto T = static_cast<Eigen::Index>(steps.size());
  if (T == 0 || ex.from_last.size() != T) return ScoreValue::missing();
  return logit::weighted_nll(steps, std::span<const double>(ex.from_last.data(), static_cast<std::size_t>(T)));
}

/// d x S matrix of sample embeddings, one column per sample.
struct EmbeddingSet {
  Eigen::MatrixXd matrix;

  Eigen::Index dim() const { return matrix.rows(); }
  Eigen::Index size() const { return matrix.cols(); }

  static std::optional<EmbeddingSet> from_samples(std::span<const SampleRecord> samples) {
    if (samples.empty() || !samples.front().embedding) return std::nullopt;
    const auto d = static_cast<Eigen::Index>(samples.front().embedding->size());
    EmbeddingSet out{Eigen::MatrixXd(d, static_cast<Eigen::Index>(samples.size()))};
    for (std::size_t s = 0; s < samples.size(); ++s) {
      if (!samples[s].embedding || static_cast<Eigen::Index>(samples[s].embedding->size()) != d)
        return std::nullopt;
      out.matrix.col(static_cast<Eigen::Index>(s)) =
          Eigen::Map<const Eigen::VectorXd>(samples[s].embedding->data(), d);
    }
    return out;
  }
};

/// Mean log-eigenvalue of E^T J_d E + reg I, J_d centering over the feature
/// dimension.
inline ScoreValue eigenscore(const EmbeddingSet& emb, double reg = 1e-3) {
  const auto d = emb.dim();
  const auto S = emb.size();
  if (S < 2 || d < 1) return ScoreValue::missing();
  if (!emb.matrix.allFinite()) throw DataError("eigenscore: non-finite embedding entries");
  const Eigen::MatrixXd centered = emb.matrix.rowwise() - emb.matrix.colwise().mean();
  Eigen::MatrixXd c = centered.transpose() * centered;
  c.diagonal().array() += reg;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(c, Eigen::EigenvaluesOnly);
  double sum = 0.0;
  for (Eigen::Index k = 0; k < S; ++k) sum += std::log(std::max(solver.eigenvalues()(k), 1e-12));
  return sum / static_cast<double>(S);
}

}  // namespace uqbench::internal

#endif  // UQBENCH_INTERNAL_EST_HPP_
