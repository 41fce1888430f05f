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

#ifndef UQBENCH_TRACE_HPP_
#define UQBENCH_TRACE_HPP_

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "uqbench/common.hpp"

namespace uqbench {

inline constexpr std::string_view kSchemaVersion = "1.0";

enum class NliLabel { kEntail, kContra, kNeutral };

struct AlternativeToken {
  std::int64_t token_id = 0;
  double probability = 0.0;
  NliLabel nli_label = NliLabel::kNeutral;
};

struct DistEntry {
  std::int64_t token_id = 0;
  double probability = 0.0;
};

/// One position of the scored response. Log-probabilities are in nats.
/// Attention vectors are layer-major with `layers * heads` entries, shaped by
/// GenerationTrace::attention.
struct TokenStep {
  double logprob_cond = 0.0;
  std::optional<double> logprob_uncond;
  std::optional<double> entropy;
  std::optional<std::vector<DistEntry>> dist;
  // Number of finite-support vocabulary entries; defaults to dist->size().
  std::optional<std::int64_t> support_size;
  std::optional<std::vector<AlternativeToken>> alternatives;
  std::optional<double> loo_similarity;
  std::optional<std::vector<double>> attn_diag;
  std::optional<std::vector<double>> attn_prev;
  std::optional<double> attn_from_last;

  std::int64_t effective_support() const {
    if (support_size) return *support_size;
    return dist ? static_cast<std::int64_t>(dist->size()) : 0;
  }
};

struct SampleRecord {
  std::string text;
  std::vector<std::int64_t> tokens;
  std::vector<double> token_logprobs;
  // Relevance-weighted per-token log-probabilities R_t * log p_t, so that
  // their sum is the negated TokenSAR score of the sample.
  std::optional<std::vector<double>> tokensar_logprobs;
  std::optional<std::vector<double>> embedding;

  double log_prob() const {
    double s = 0.0;
    for (double lp : token_logprobs) s += lp;
    return s;
  }
};

using BoolMatrix = Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic>;

struct RelationMatrices {
  std::optional<Eigen::MatrixXd> entail;
  std::optional<Eigen::MatrixXd> contra;
  std::optional<Eigen::MatrixXd> soft_entail;
  std::optional<Eigen::MatrixXd> sent_sim;
  // Whether the K units of sent_sim include the greedy response.
  bool sent_sim_includes_greedy = true;
  std::optional<Eigen::MatrixXd> sample_sim;
  std::optional<BoolMatrix> bidir_entail_label;
  // Per-sample Semantic Density kernel K_s, computed by the recorder.
  std::optional<Eigen::VectorXd> kernel_scores;
};

struct AttentionShape {
  int layers = 0;
  int heads = 0;
};

struct ReflexiveRecord {
  std::optional<double> p_true;
  std::optional<double> p_true_sampling;
  std::optional<std::vector<bool>> empirical_true_flags;
};

enum class QualityKind { kBinary, kContinuous };

struct QualityLabel {
  double value = 1.0;
  QualityKind kind = QualityKind::kBinary;
};

enum class Split { kTrain, kEval };

struct GenerationTrace {
  std::string instance_id;
  // Optional grouping key for query-level bootstrap resampling.
  std::optional<std::string> query_id;
  Split split = Split::kEval;
  std::string response_text;
  std::vector<TokenStep> response;
  std::vector<SampleRecord> samples;
  std::optional<RelationMatrices> relations;
  std::optional<AttentionShape> attention;
  std::optional<std::vector<double>> greedy_embedding;
  std::optional<ReflexiveRecord> reflexive;
  QualityLabel quality;
};

// ---------------------------------------------------------------------------
// Capabilities

enum class Capability {
  kLogits,
  kUncondLogits,
  kDists,
  kAlternatives,
  kSamples,
  kRelations,
  kAttention,
  kEmbeddings,
  kReflexive,
  kLooSim,
};

inline constexpr std::array<std::pair<Capability, std::string_view>, 10> kCapabilityNames{{
    {Capability::kLogits, "logits"},
    {Capability::kUncondLogits, "uncond_logits"},
    {Capability::kDists, "dists"},
    {Capability::kAlternatives, "alternatives"},
    {Capability::kSamples, "samples"},
    {Capability::kRelations, "relations"},
    {Capability::kAttention, "attention"},
    {Capability::kEmbeddings, "embeddings"},
    {Capability::kReflexive, "reflexive"},
    {Capability::kLooSim, "loo_sim"},
}};

inline std::string_view to_string(Capability c) {
  for (const auto& [cap, name] : kCapabilityNames)
    if (cap == c) return name;
  return "?";
}

inline Capability parse_capability(std::string_view tag) {
  for (const auto& [cap, name] : kCapabilityNames)
    if (name == tag) return cap;
  throw ConfigError("unknown capability tag '" + std::string(tag) + "'");
}

namespace detail {
template <typename Pred>
bool all_steps(const GenerationTrace& t, Pred pred) {
  return !t.response.empty() && std::all_of(t.response.begin(), t.response.end(), pred);
}
}  // namespace detail

/// True iff every field read by estimators of capability `c` is present.
inline bool require(const GenerationTrace& trace, Capability c) {
  switch (c) {
    case Capability::kLogits:
      return detail::all_steps(trace, [](const TokenStep& s) { return s.entropy.has_value(); });
    case Capability::kUncondLogits:
      return detail::all_steps(trace,
                               [](const TokenStep& s) { return s.logprob_uncond.has_value(); });
    case Capability::kDists:
      return detail::all_steps(trace,
                               [](const TokenStep& s) { return s.dist && !s.dist->empty(); });
    case Capability::kAlternatives:
      return detail::all_steps(
          trace, [](const TokenStep& s) { return s.alternatives && !s.alternatives->empty(); });
    case Capability::kSamples:
      return !trace.samples.empty();
    case Capability::kRelations: {
      if (!trace.relations) return false;
      const auto& r = *trace.relations;
      return r.entail && r.contra && r.soft_entail && r.sent_sim && r.sample_sim &&
             r.bidir_entail_label && r.kernel_scores;
    }
    case Capability::kAttention:
      return trace.attention.has_value() && detail::all_steps(trace, [](const TokenStep& s) {
               return s.attn_diag && s.attn_prev && s.attn_from_last;
             });
    case Capability::kEmbeddings:
      // Sample embeddings are required only for the samples that exist.
      return trace.greedy_embedding.has_value() &&
             std::all_of(trace.samples.begin(), trace.samples.end(),
                         [](const SampleRecord& s) { return s.embedding.has_value(); });
    case Capability::kReflexive:
      return trace.reflexive && trace.reflexive->p_true && trace.reflexive->p_true_sampling &&
             trace.reflexive->empirical_true_flags;
    case Capability::kLooSim:
      return detail::all_steps(trace,
                               [](const TokenStep& s) { return s.loo_similarity.has_value(); });
  }
  return false;
}

inline bool require(const GenerationTrace& trace, std::string_view tag) {
  return require(trace, parse_capability(tag));
}

/// Drops every optional field that belongs to capability `c`. Used to audit
/// that estimators only read their declared inputs.
inline void strip_capability(GenerationTrace& trace, Capability c) {
  switch (c) {
    case Capability::kLogits:
      for (auto& s : trace.response) s.entropy.reset();
      break;
    case Capability::kUncondLogits:
      for (auto& s : trace.response) s.logprob_uncond.reset();
      break;
    case Capability::kDists:
      for (auto& s : trace.response) {
        s.dist.reset();
        s.support_size.reset();
      }
      break;
    case Capability::kAlternatives:
      for (auto& s : trace.response) s.alternatives.reset();
      break;
    case Capability::kSamples:
      trace.samples.clear();
      break;
    case Capability::kRelations:
      trace.relations.reset();
      break;
    case Capability::kAttention:
      trace.attention.reset();
      for (auto& s : trace.response) {
        s.attn_diag.reset();
        s.attn_prev.reset();
        s.attn_from_last.reset();
      }
      break;
    case Capability::kEmbeddings:
      trace.greedy_embedding.reset();
      for (auto& s : trace.samples) s.embedding.reset();
      break;
    case Capability::kReflexive:
      trace.reflexive.reset();
      break;
    case Capability::kLooSim:
      for (auto& s : trace.response) s.loo_similarity.reset();
      break;
  }
}

// ---------------------------------------------------------------------------
// Validation

namespace detail {

inline void fail(const std::string& id, const std::string& field, const std::string& what) {
  throw DataError("instance '" + id + "': field '" + field + "' " + what);
}

inline bool is_prob(double p) { return std::isfinite(p) && p >= 0.0 && p <= 1.0; }

inline void check_unit_matrix(const std::string& id, const std::string& name,
                              const Eigen::MatrixXd& m, Eigen::Index n, bool unit_diag) {
  if (m.rows() != n || m.cols() != n)
    fail(id, name, "must be " + std::to_string(n) + "x" + std::to_string(n));
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j)
      if (!is_prob(m(i, j))) fail(id, name, "has an entry outside [0,1]");
  if (unit_diag)
    for (Eigen::Index i = 0; i < n; ++i)
      if (std::abs(m(i, i) - 1.0) > 1e-6) fail(id, name, "diagonal must equal 1");
}

}  // namespace detail

/// Checks all type invariants; throws DataError naming the offending field.
inline void validate(const GenerationTrace& t) {
  using detail::fail;
  using detail::is_prob;
  const std::string& id = t.instance_id;
  if (id.empty()) fail(id, "instance_id", "must be non-empty");
  if (t.response.empty()) fail(id, "response", "must contain at least one token");

  std::size_t attn_width = 0;
  if (t.attention) {
    if (t.attention->layers < 1 || t.attention->heads < 1)
      fail(id, "attention", "layers and heads must be >= 1");
    attn_width = static_cast<std::size_t>(t.attention->layers * t.attention->heads);
  }

  for (std::size_t i = 0; i < t.response.size(); ++i) {
    const TokenStep& s = t.response[i];
    const std::string at = "response[" + std::to_string(i) + "].";
    if (!std::isfinite(s.logprob_cond) || s.logprob_cond > 0.0)
      fail(id, at + "logprob_cond", "must be a finite log-probability <= 0");
    if (s.logprob_uncond && (!std::isfinite(*s.logprob_uncond) || *s.logprob_uncond > 0.0))
      fail(id, at + "logprob_uncond", "must be a finite log-probability <= 0");
    if (s.entropy && (!std::isfinite(*s.entropy) || *s.entropy < 0.0))
      fail(id, at + "entropy", "must be finite and >= 0");
    if (s.dist) {
      double total = 0.0;
      for (const auto& e : *s.dist) {
        if (!is_prob(e.probability)) fail(id, at + "dist", "has a probability outside [0,1]");
        total += e.probability;
      }
      if (total > 1.0 + 1e-6) fail(id, at + "dist", "probabilities sum above 1");
      if (s.support_size && *s.support_size < static_cast<std::int64_t>(s.dist->size()))
        fail(id, at + "support_size", "is smaller than the number of dist entries");
    } else if (s.support_size) {
      fail(id, at + "support_size", "requires dist");
    }
    if (s.alternatives && !s.alternatives->empty()) {
      const auto& alts = *s.alternatives;
      for (const auto& a : alts)
        if (!is_prob(a.probability)) fail(id, at + "alternatives", "has a probability outside [0,1]");
      if (alts.front().nli_label != NliLabel::kEntail)
        fail(id, at + "alternatives", "first (realized) alternative must be labeled entail");
      const double realized = std::exp(s.logprob_cond);
      if (std::abs(alts.front().probability - realized) > 1e-6 * std::max(1.0, realized))
        fail(id, at + "alternatives", "first alternative must carry the realized token probability");
      for (std::size_t k = 2; k < alts.size(); ++k)
        if (alts[k].probability > alts[k - 1].probability)
          fail(id, at + "alternatives", "must be sorted by descending probability");
    }
    if (s.loo_similarity && !is_prob(*s.loo_similarity))
      fail(id, at + "loo_similarity", "must lie in [0,1]");
    auto check_attn = [&](const std::optional<std::vector<double>>& v, const char* name) {
      if (!v) return;
      if (!t.attention) fail(id, at + name, "requires the trace-level attention shape");
      if (v->size() != attn_width) fail(id, at + name, "must have layers*heads entries");
      for (double a : *v)
        if (!is_prob(a)) fail(id, at + name, "has a weight outside [0,1]");
    };
    check_attn(s.attn_diag, "attn_diag");
    check_attn(s.attn_prev, "attn_prev");
    if (s.attn_from_last && !is_prob(*s.attn_from_last))
      fail(id, at + "attn_from_last", "must lie in [0,1]");
  }

  std::optional<std::size_t> emb_dim;
  for (std::size_t i = 0; i < t.samples.size(); ++i) {
    const SampleRecord& s = t.samples[i];
    const std::string at = "samples[" + std::to_string(i) + "].";
    if (s.token_logprobs.size() != s.tokens.size())
      fail(id, at + "token_logprobs", "length must equal tokens length");
    for (double lp : s.token_logprobs)
      if (!std::isfinite(lp) || lp > 0.0) fail(id, at + "token_logprobs", "must be finite and <= 0");
    if (s.tokensar_logprobs) {
      if (s.tokensar_logprobs->size() != s.tokens.size())
        fail(id, at + "tokensar_logprobs", "length must equal tokens length");
      for (double lp : *s.tokensar_logprobs)
        if (!std::isfinite(lp) || lp > 0.0)
          fail(id, at + "tokensar_logprobs", "must be finite and <= 0");
    }
    if (s.embedding) {
      for (double x : *s.embedding)
        if (!std::isfinite(x)) fail(id, at + "embedding", "has a non-finite entry");
      if (emb_dim && *emb_dim != s.embedding->size())
        fail(id, at + "embedding", "dimension differs across samples");
      emb_dim = s.embedding->size();
    }
  }
  if (t.greedy_embedding)
    for (double x : *t.greedy_embedding)
      if (!std::isfinite(x)) fail(id, "greedy_embedding", "has a non-finite entry");

  if (t.relations) {
    const auto& r = *t.relations;
    const Eigen::Index n = static_cast<Eigen::Index>(t.samples.size());
    if (r.entail) detail::check_unit_matrix(id, "relations.entail", *r.entail, n, false);
    if (r.contra) detail::check_unit_matrix(id, "relations.contra", *r.contra, n, false);
    if (r.soft_entail)
      detail::check_unit_matrix(id, "relations.soft_entail", *r.soft_entail, n, false);
    if (r.sample_sim) detail::check_unit_matrix(id, "relations.sample_sim", *r.sample_sim, n, true);
    if (r.sent_sim) {
      const Eigen::Index k = r.sent_sim->rows();
      if (k < 1) fail(id, "relations.sent_sim", "must be non-empty");
      detail::check_unit_matrix(id, "relations.sent_sim", *r.sent_sim, k, true);
    }
    if (r.bidir_entail_label) {
      const auto& b = *r.bidir_entail_label;
      if (b.rows() != n || b.cols() != n)
        fail(id, "relations.bidir_entail_label", "must be SxS");
      for (Eigen::Index i = 0; i < n; ++i)
        if (!b(i, i)) fail(id, "relations.bidir_entail_label", "diagonal must be true");
    }
    if (r.kernel_scores) {
      if (r.kernel_scores->size() != n) fail(id, "relations.kernel_scores", "must have S entries");
      for (Eigen::Index i = 0; i < n; ++i)
        if (!is_prob((*r.kernel_scores)(i)))
          fail(id, "relations.kernel_scores", "has an entry outside [0,1]");
    }
  }

  if (t.reflexive) {
    const auto& r = *t.reflexive;
    auto check_p = [&](const std::optional<double>& p, const char* name) {
      if (p && (!std::isfinite(*p) || *p <= 0.0 || *p > 1.0))
        fail(id, std::string("reflexive.") + name, "must lie in (0,1]");
    };
    check_p(r.p_true, "p_true");
    check_p(r.p_true_sampling, "p_true_sampling");
    if (r.empirical_true_flags && r.empirical_true_flags->empty())
      fail(id, "reflexive.empirical_true_flags", "must hold at least one flag");
  }

  if (!is_prob(t.quality.value)) fail(id, "quality.value", "must lie in [0,1]");
  if (t.quality.kind == QualityKind::kBinary && t.quality.value != 0.0 && t.quality.value != 1.0)
    fail(id, "quality.value", "binary quality must be 0 or 1");
}

/// Throws if an instance id appears twice (and hence possibly in both splits).
inline void validate_corpus(const std::vector<GenerationTrace>& traces) {
  std::set<std::string_view> seen;
  for (const auto& t : traces)
    if (!seen.insert(t.instance_id).second)
      throw DataError("instance '" + t.instance_id + "' appears more than once");
}

}  // namespace uqbench

#endif  // UQBENCH_TRACE_HPP_
