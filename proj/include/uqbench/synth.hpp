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

#ifndef UQBENCH_SYNTH_HPP_
#define UQBENCH_SYNTH_HPP_

// Synthetic trace generator with a planted uncertainty signal.
//
// Each instance is hallucinated (h = 1, quality 0) with the configured rate.
// The sequence NLL -- and therefore MSP -- is planted as
//
//   MSP = 0.5 + 3u,   u = s*h + (1 - s)*e1 + 0.001*e2,   e1, e2 ~ U(0,1)
//
// so signal s = 1 separates the classes perfectly and s = 0 makes MSP
// independent of quality. Every other capability is populated with valid
// values loosely driven by u, so all estimators produce scores.
//
// Random variates come straight from mt19937_64 bits (no std::*_distribution)
// to keep fixtures identical across standard libraries.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "uqbench/common.hpp"
#include "uqbench/config.hpp"
#include "uqbench/trace.hpp"

namespace uqbench {

/// Portable variates on top of mt19937_64.
class SynthRng {
 public:
  SynthRng(std::uint64_t seed, std::uint64_t stream) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)};
    engine_.seed(seq);
  }

  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }  // [0,1)
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  std::size_t index(std::size_t n) { return static_cast<std::size_t>(uniform() * static_cast<double>(n)); }
  bool bernoulli(double p) { return uniform() < p; }
  double normal() {  // Box-Muller, one variate per call
    const double u1 = 1.0 - uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }

 private:
  std::mt19937_64 engine_;
};

inline void check_synth_params(const SynthParams& p) {
  if (p.t_min < 1 || p.t_max < p.t_min) throw ConfigError("synth: need 1 <= t_min <= t_max");
  if (p.samples < 2) throw ConfigError("synth: need at least 2 samples");
  if (!(p.hallucination_rate >= 0.0 && p.hallucination_rate <= 1.0))
    throw ConfigError("synth: hallucination_rate must lie in [0,1]");
  if (!(p.signal >= 0.0 && p.signal <= 1.0)) throw ConfigError("synth: signal must lie in [0,1]");
  if (!(p.train_fraction >= 0.0 && p.train_fraction <= 1.0))
    throw ConfigError("synth: train_fraction must lie in [0,1]");
}

namespace synth_detail {

inline constexpr int kLayers = 6;
inline constexpr int kHeads = 4;
inline constexpr std::size_t kEmbeddingDim = 8;
inline constexpr std::size_t kVocab = 24;
inline constexpr std::size_t kDistEntries = 5;
inline constexpr std::size_t kEmpiricalFlags = 10;
inline constexpr std::int64_t kSupport = 32000;

inline std::string word(std::size_t w) { return "w" + std::to_string(w); }

inline std::vector<double> gaussian_vector(SynthRng& rng, std::size_t d, double shift) {
  std::vector<double> v(d);
  for (std::size_t k = 0; k < d; ++k) v[k] = rng.normal() + (k < 3 ? shift : 0.0);
  return v;
}

inline double clamp01(double x) { return std::clamp(x, 0.0, 1.0); }

// Relation value between two items in the same / different semantic class.
inline double affinity(SynthRng& rng, bool same, double hi_lo, double lo_hi) {
  return same ? rng.uniform(hi_lo, 1.0) : rng.uniform(0.0, lo_hi);
}

inline TokenStep make_step(SynthRng& rng, double logprob, double u) {
  TokenStep s;
  s.logprob_cond = logprob;
  s.logprob_uncond = logprob - rng.uniform(0.0, 0.6);
  const double p = std::exp(logprob);
  // Recorded top-k distribution: the realized token first, then a
  // descending split of part of the remaining mass.
  std::vector<double> rest(kDistEntries - 1);
  double z = 0.0;
  for (auto& r : rest) z += (r = rng.uniform(0.1, 1.0));
  const double mass = (1.0 - p) * rng.uniform(0.5, 0.95);
  for (auto& r : rest) r = mass * r / z;
  std::sort(rest.begin(), rest.end(), std::greater<>());
  std::vector<DistEntry> dist{{static_cast<std::int64_t>(rng.index(kSupport)), p}};
  for (double r : rest) dist.push_back({static_cast<std::int64_t>(rng.index(kSupport)), r});
  double entropy = 0.0;
  for (const auto& e : dist)
    if (e.probability > 0.0) entropy -= e.probability * std::log(e.probability);
  s.entropy = entropy;
  s.dist = dist;
  s.support_size = kSupport;

  std::vector<AlternativeToken> alts{{dist[0].token_id, p, NliLabel::kEntail}};
  for (std::size_t k = 1; k < 4; ++k) {
    const double r = rng.uniform();
    const NliLabel label = r < 0.5 - 0.3 * std::min(u, 1.0) ? NliLabel::kEntail
                           : r < 0.8                         ? NliLabel::kContra
                                                             : NliLabel::kNeutral;
    alts.push_back({dist[k].token_id, dist[k].probability, label});
  }
  s.alternatives = alts;
  s.loo_similarity = rng.uniform();

  const std::size_t width = static_cast<std::size_t>(kLayers * kHeads);
  std::vector<double> diag(width), prev(width);
  for (auto& a : diag) a = clamp01(rng.uniform(0.05, 0.6) + 0.2 * std::min(u, 1.0) * rng.uniform());
  for (auto& a : prev) a = clamp01(rng.uniform(0.0, 0.5) * (1.0 - 0.4 * std::min(u, 1.0)) + 0.01);
  s.attn_diag = diag;
  s.attn_prev = prev;
  s.attn_from_last = rng.uniform(0.01, 0.3);
  return s;
}

}  // namespace synth_detail

/// Generates instance `i` of a synthetic corpus.
inline GenerationTrace synth_instance(const SynthParams& p, std::size_t i) {
  using namespace synth_detail;
  SynthRng rng(p.seed, static_cast<std::uint64_t>(i));
  GenerationTrace t;
  char id[32];
  std::snprintf(id, sizeof id, "syn-%05zu", i);
  t.instance_id = id;
  t.split = rng.bernoulli(p.train_fraction) ? Split::kTrain : Split::kEval;
  const bool h = rng.bernoulli(p.hallucination_rate);
  t.quality = {h ? 0.0 : 1.0, QualityKind::kBinary};

  const double e1 = rng.uniform();
  const double e2 = rng.uniform();
  const double u = p.signal * (h ? 1.0 : 0.0) + (1.0 - p.signal) * e1 + 0.001 * e2;
  const double msp = 0.5 + 3.0 * u;

  // Response: T tokens whose log-probabilities sum to -msp.
  const std::size_t T = p.t_min + rng.index(p.t_max - p.t_min + 1);
  std::vector<double> w(T);
  double wz = 0.0;
  for (auto& x : w) wz += (x = rng.uniform(0.5, 1.5));
  std::vector<std::string> words;
  for (std::size_t k = 0; k < T; ++k) {
    t.response.push_back(make_step(rng, -msp * w[k] / wz, u));
    words.push_back(word(rng.index(kVocab)));
  }
  for (std::size_t k = 0; k < words.size(); ++k) t.response_text += (k ? " " : "") + words[k];
  t.attention = AttentionShape{kLayers, kHeads};

  // Samples fall into semantic classes; more classes when u is high.
  const std::size_t S = p.samples;
  const double spread = std::min(u, 1.0);
  std::vector<std::size_t> cls(S + 1, 0);  // index 0: greedy response
  std::size_t next_class = 1;
  for (std::size_t s = 1; s <= S; ++s) {
    if (rng.bernoulli(0.15 + 0.6 * spread)) {
      cls[s] = rng.bernoulli(0.5) || next_class == 1 ? next_class++ : 1 + rng.index(next_class - 1);
    }
  }
  // Class "templates": a shared word list per class.
  std::vector<std::vector<std::size_t>> templates(next_class);
  for (auto& tpl : templates) {
    const std::size_t len = 3 + rng.index(4);
    for (std::size_t k = 0; k < len; ++k) tpl.push_back(rng.index(kVocab));
  }
  for (std::size_t s = 1; s <= S; ++s) {
    SampleRecord rec;
    auto tpl = templates[cls[s]];
    if (rng.bernoulli(0.5)) tpl[rng.index(tpl.size())] = rng.index(kVocab);
    for (std::size_t k = 0; k < tpl.size(); ++k) {
      rec.text += (k ? " " : "") + word(tpl[k]);
      rec.tokens.push_back(static_cast<std::int64_t>(tpl[k]));
      const double lp = -(0.05 + rng.uniform(0.0, 0.3 + 0.7 * spread));
      rec.token_logprobs.push_back(lp);
    }
    std::vector<double> adj;
    for (double lp : rec.token_logprobs) adj.push_back(lp * rng.uniform(0.2, 1.0));
    rec.tokensar_logprobs = adj;
    rec.embedding = gaussian_vector(rng, kEmbeddingDim, 0.5 * static_cast<double>(cls[s]));
    t.samples.push_back(std::move(rec));
  }

  RelationMatrices r;
  const auto n = static_cast<Eigen::Index>(S);
  Eigen::MatrixXd entail(n, n), contra(n, n), soft(n, n), sim(n, n);
  BoolMatrix bidir(n, n);
  for (Eigen::Index a = 0; a < n; ++a)
    for (Eigen::Index b = 0; b < n; ++b) {
      const bool same = cls[static_cast<std::size_t>(a) + 1] == cls[static_cast<std::size_t>(b) + 1];
      if (a == b) {
        entail(a, b) = soft(a, b) = sim(a, b) = 1.0;
        contra(a, b) = 0.0;
        bidir(a, b) = true;
        continue;
      }
      entail(a, b) = affinity(rng, same, 0.7, 0.3);
      contra(a, b) = same ? rng.uniform(0.0, 0.1) : rng.uniform(0.4, 1.0);
      soft(a, b) = affinity(rng, same, 0.6, 0.4);
      if (b > a) {
        sim(a, b) = sim(b, a) = affinity(rng, same, 0.6, 0.5);
        bidir(a, b) = bidir(b, a) = same;
      }
    }
  const auto k = n + 1;
  Eigen::MatrixXd sent(k, k);
  for (Eigen::Index a = 0; a < k; ++a) {
    sent(a, a) = 1.0;
    for (Eigen::Index b = a + 1; b < k; ++b)
      sent(a, b) = sent(b, a) = affinity(rng, cls[static_cast<std::size_t>(a)] == cls[static_cast<std::size_t>(b)], 0.6, 0.5);
  }
  Eigen::VectorXd kernel(n);
  for (Eigen::Index s = 0; s < n; ++s) kernel(s) = affinity(rng, cls[static_cast<std::size_t>(s) + 1] == 0, 0.6, 0.4);
  r.entail = entail;
  r.contra = contra;
  r.soft_entail = soft;
  r.sample_sim = sim;
  r.sent_sim = sent;
  r.sent_sim_includes_greedy = true;
  r.bidir_entail_label = bidir;
  r.kernel_scores = kernel;
  t.relations = std::move(r);

  t.greedy_embedding = gaussian_vector(rng, kEmbeddingDim, 1.5 * spread);

  ReflexiveRecord refl;
  refl.p_true = std::clamp(0.9 - 0.6 * spread + 0.1 * rng.uniform(), 0.01, 1.0);
  refl.p_true_sampling = std::clamp(0.85 - 0.5 * spread + 0.1 * rng.uniform(), 0.01, 1.0);
  std::vector<bool> flags(kEmpiricalFlags);
  for (std::size_t f = 0; f < flags.size(); ++f) flags[f] = rng.bernoulli(0.9 - 0.6 * spread);
  refl.empirical_true_flags = flags;
  t.reflexive = refl;
  return t;
}

/// Deterministic synthetic corpus; instance i depends only on (seed, i).
inline std::vector<GenerationTrace> synth_traces(const SynthParams& p) {
  check_synth_params(p);
  std::vector<GenerationTrace> out;
  out.reserve(p.n);
  for (std::size_t i = 0; i < p.n; ++i) {
    out.push_back(synth_instance(p, i));
    validate(out.back());
  }
  return out;
}

}  // namespace uqbench

#endif  // UQBENCH_SYNTH_HPP_
