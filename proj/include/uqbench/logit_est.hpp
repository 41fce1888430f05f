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

#ifndef UQBENCH_LOGIT_EST_HPP_
#define UQBENCH_LOGIT_EST_HPP_

// Single-pass information/logit estimators and white-box reflexive scores.

#include <algorithm>
#include <cmath>
#include <numbers>
#include <span>
#include <utility>
#include <vector>

#include "uqbench/common.hpp"
#include "uqbench/trace.hpp"

namespace uqbench::logit {

using Steps = std::span<const TokenStep>;

struct NllScores {
  ScoreValue msp;
  ScoreValue ppl;
};

/// Sequence NLL (MSP) and its per-token mean (PPL).
inline NllScores nll_scores(Steps steps) {
  if (steps.empty()) throw DataError("nll_scores: empty token sequence");
  double nll = 0.0;
  for (const auto& s : steps) nll -= s.logprob_cond;
  return {nll, nll / static_cast<double>(steps.size())};
}

inline ScoreValue mean_token_entropy(Steps steps) {
  if (steps.empty()) return ScoreValue::missing();
  double sum = 0.0;
  for (const auto& s : steps) {
    if (!s.entropy) return ScoreValue::missing();
    sum += *s.entropy;
  }
  return sum / static_cast<double>(steps.size());
}

enum class UniformMode { kSelfCertainty, kRenyi, kFisherRao };

/// Temperature-rescaled distribution q proportional to p^(1/tau) over the
/// recorded support.
inline std::vector<double> temper(const std::vector<DistEntry>& dist, double tau) {
  std::vector<double> q(dist.size());
  double z = 0.0;
  for (std::size_t i = 0; i < dist.size(); ++i) {
    q[i] = std::pow(dist[i].probability, 1.0 / tau);
    z += q[i];
  }
  if (z > 0.0)
    for (double& v : q) v /= z;
  return q;
}

/// Divergence of the predictive distribution from uniform, averaged over
/// positions and negated so larger means more uncertain.
///
/// self_certainty uses KL(U || p) on the raw recorded support; renyi and
/// fisher_rao compare the tempered distribution q against uniform over
/// support_size entries. Both of the latter are exactly 0 at uniform q.
inline ScoreValue uniform_divergence(Steps steps, UniformMode mode, double alpha = 0.5,
                                     double tau = 2.0) {
  if (steps.empty()) return ScoreValue::missing();
  double total = 0.0;
  for (const auto& s : steps) {
    if (!s.dist || s.dist->empty()) return ScoreValue::missing();
    const auto& dist = *s.dist;
    switch (mode) {
      case UniformMode::kSelfCertainty: {
        const double n = static_cast<double>(dist.size());
        double mean_log = 0.0;
        for (const auto& e : dist) mean_log += safe_log(e.probability);
        total += -std::log(n) - mean_log / n;
        break;
      }
      case UniformMode::kRenyi: {
        const auto q = temper(dist, tau);
        const double v = static_cast<double>(s.effective_support());
        double power_sum = 0.0;
        for (double x : q) power_sum += std::pow(x, alpha);
        total += std::log(v) + std::log(power_sum) / (alpha - 1.0);
        break;
      }
      case UniformMode::kFisherRao: {
        const auto q = temper(dist, tau);
        const double v = static_cast<double>(s.effective_support());
        double affinity = 0.0;
        for (double x : q) affinity += std::sqrt(x / v);
        affinity = std::min(1.0, affinity);
        total += 2.0 / std::numbers::pi * std::acos(affinity);
        break;
      }
    }
  }
  return -total / static_cast<double>(steps.size());
}

enum class PmiMode { kPmi, kCpmi };

/// Mean pointwise mutual information between response and prompt, negated.
/// CPMI applies the unconditional correction with weight lambda only at
/// positions whose entropy reaches tau_gate.
inline ScoreValue pmi_scores(Steps steps, PmiMode mode, double tau_gate = 0.0656,
                             double lambda = 3.599) {
  if (steps.empty()) return ScoreValue::missing();
  double sum = 0.0;
  for (const auto& s : steps) {
    if (!s.logprob_uncond) return ScoreValue::missing();
    if (mode == PmiMode::kPmi) {
      sum += s.logprob_cond - *s.logprob_uncond;
    } else {
      if (!s.entropy) return ScoreValue::missing();
      const double gate = *s.entropy >= tau_gate ? 1.0 : 0.0;
      sum += s.logprob_cond - lambda * gate * *s.logprob_uncond;
    }
  }
  return -sum / static_cast<double>(steps.size());
}

/// Per-token NLL weighted by w (normalized to sum 1). Exactly uniform
/// weights take the plain-mean path, which matches PPL bit-for-bit.
/// Missing when the weights do not have a positive sum.
inline ScoreValue weighted_nll(Steps steps, std::span<const double> w) {
  if (steps.empty() || w.size() != steps.size()) return ScoreValue::missing();
  if (std::all_of(w.begin(), w.end(), [&](double x) { return x == w.front(); })) {
    if (!(w.front() > 0.0)) return ScoreValue::missing();
    return nll_scores(steps).ppl;
  }
  double norm = 0.0;
  for (double x : w) norm += x;
  if (!(norm > 0.0)) return ScoreValue::missing();
  double score = 0.0;
  for (std::size_t t = 0; t < steps.size(); ++t) score += w[t] / norm * -steps[t].logprob_cond;
  return score;
}

/// Relevance-weighted NLL with relevance 1 - loo_similarity.
inline ScoreValue token_sar(Steps steps) {
  std::vector<double> relevance;
  relevance.reserve(steps.size());
  for (const auto& s : steps) {
    if (!s.loo_similarity) return ScoreValue::missing();
    relevance.push_back(1.0 - *s.loo_similarity);
  }
  return weighted_nll(steps, relevance);
}

/// Claim-conditioned probability: negated product over positions of the
/// entailing share of entail-or-contra alternative mass.
inline ScoreValue ccp(Steps steps) {
  if (steps.empty()) return ScoreValue::missing();
  double product = 1.0;
  for (const auto& s : steps) {
    if (!s.alternatives || s.alternatives->empty()) return ScoreValue::missing();
    double entail = 0.0;
    double contra = 0.0;
    for (const auto& a : *s.alternatives) {
      if (a.nli_label == NliLabel::kEntail) entail += a.probability;
      if (a.nli_label == NliLabel::kContra) contra += a.probability;
    }
    // The realized token is always entailing, so the denominator is positive
    // unless its recorded probability underflowed.
    if (!(entail + contra > 0.0)) return ScoreValue::missing();
    product *= entail / (entail + contra);
  }
  return -product;
}

enum class PTrueVariant { kPTrue, kPTrueSampling };

inline ScoreValue ptrue_nll(const std::optional<ReflexiveRecord>& record, PTrueVariant variant) {
  if (!record) return ScoreValue::missing();
  const auto& p = variant == PTrueVariant::kPTrue ? record->p_true : record->p_true_sampling;
  if (!p) return ScoreValue::missing();
  return -safe_log(*p);
}

}  // namespace uqbench::logit

#endif  // UQBENCH_LOGIT_EST_HPP_
