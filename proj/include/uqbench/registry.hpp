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

#ifndef UQBENCH_REGISTRY_HPP_
#define UQBENCH_REGISTRY_HPP_

// The estimator catalog: ids, display names, families, declared input
// capabilities, and per-trace scoring. Intermediate quantities (sequence
// NLL, semantic classes, attention slices, relation graphs) are computed
// once per trace and shared by every estimator that reads them.

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "uqbench/blackbox_est.hpp"
#include "uqbench/common.hpp"
#include "uqbench/density_est.hpp"
#include "uqbench/internal_est.hpp"
#include "uqbench/logit_est.hpp"
#include "uqbench/sample_est.hpp"
#include "uqbench/score_table.hpp"
#include "uqbench/trace.hpp"

namespace uqbench {

enum class Est : std::uint8_t {
  // information
  kMsp, kPpl, kMte, kPmi, kCpmi, kSelfCertainty, kRenyi, kFisherRao, kTokenSar, kCcp,
  // sample
  kMcse, kMcnse, kSemanticEntropy, kSemanticDensity, kSentenceSar, kSar, kCocoaMsp, kCocoaPpl, kCocoaMte,
  // internal
  kAttentionScore, kRauq, kCsl, kEigenScore,
  // training
  kMd, kRmd, kRde, kHuqMd, kHuqRmd,
  // reflexive
  kPTrue, kPTrueSampling, kPTrueEmpirical,
  // blackbox
  kNumSet, kLabelProb, kKle,
  kEigValLapEntail, kEigValLapContra, kEigValLapJaccard,
  kEccEntail, kEccContra, kEccJaccard,
  kDegMatEntail, kDegMatContra, kDegMatJaccard,
  kLuq, kLexSimRougeL, kLexSimBleu,
  kCount,
};

inline constexpr std::size_t kNumEstimators = static_cast<std::size_t>(Est::kCount);

struct EstimatorInfo {
  Est est;
  std::string_view id;
  std::string_view name;
  Family family;
  std::vector<Capability> needs;  // besides the always-present token log-probabilities
  bool trained = false;           // needs fitted training models
};

inline const std::vector<EstimatorInfo>& catalog() {
  using C = Capability;
  using F = Family;
  static const std::vector<EstimatorInfo> kCatalog = {
      {Est::kMsp, "MSP", "Maximum Seq. Probability (MSP)", F::kInformation, {}},
      {Est::kPpl, "PPL", "Perplexity (PPL)", F::kInformation, {}},
      {Est::kMte, "MTE", "Mean Token Entropy (MTE)", F::kInformation, {C::kLogits}},
      {Est::kPmi, "PMI", "Pointwise Mutual Info. (PMI)", F::kInformation, {C::kUncondLogits}},
      {Est::kCpmi, "CPMI", "Conditional PMI", F::kInformation, {C::kLogits, C::kUncondLogits}},
      {Est::kSelfCertainty, "SelfCertainty", "Self Certainty", F::kInformation, {C::kDists}},
      {Est::kRenyi, "Renyi", "Renyi Divergence", F::kInformation, {C::kDists}},
      {Est::kFisherRao, "FisherRao", "Fisher-Rao Distance", F::kInformation, {C::kDists}},
      {Est::kTokenSar, "TokenSAR", "Token SAR", F::kInformation, {C::kLooSim}},
      {Est::kCcp, "CCP", "Claim-Conditioned Probability (CCP)", F::kInformation, {C::kAlternatives}},

      {Est::kMcse, "MCSE", "Monte-Carlo Seq. Entropy", F::kSample, {C::kSamples}},
      {Est::kMcnse, "MCNSE", "Monte-Carlo Norm. Seq. Entropy", F::kSample, {C::kSamples}},
      {Est::kSemanticEntropy, "SemanticEntropy", "Semantic Entropy", F::kSample, {C::kSamples, C::kRelations}},
      {Est::kSemanticDensity, "SemanticDensity", "Semantic Density", F::kSample, {C::kSamples, C::kRelations}},
      {Est::kSentenceSar, "SentenceSAR", "Sentence SAR", F::kSample, {C::kSamples, C::kRelations}},
      {Est::kSar, "SAR", "SAR", F::kSample, {C::kSamples, C::kRelations}},
      {Est::kCocoaMsp, "CocoaMSP", "Cocoa MSP", F::kSample, {C::kRelations}},
      {Est::kCocoaPpl, "CocoaPPL", "Cocoa PPL", F::kSample, {C::kRelations}},
      {Est::kCocoaMte, "CocoaMTE", "Cocoa MTE", F::kSample, {C::kRelations, C::kLogits}},

      {Est::kAttentionScore, "AttentionScore", "Attention Score", F::kInternal, {C::kAttention}},
      {Est::kRauq, "RAUQ", "RAUQ", F::kInternal, {C::kAttention}},
      {Est::kCsl, "CSL", "CSL", F::kInternal, {C::kAttention}},
      {Est::kEigenScore, "EigenScore", "EigenScore", F::kInternal, {C::kSamples, C::kEmbeddings}},

      {Est::kMd, "MD", "Mahalanobis Distance (MD)", F::kTraining, {C::kEmbeddings}, true},
      {Est::kRmd, "RMD", "Relative MD (RMD)", F::kTraining, {C::kEmbeddings}, true},
      {Est::kRde, "RDE", "Robust Density Estimation (RDE)", F::kTraining, {C::kEmbeddings}, true},
      {Est::kHuqMd, "HUQ-MD", "HUQ-MD", F::kTraining, {C::kEmbeddings}, true},
      {Est::kHuqRmd, "HUQ-RMD", "HUQ-RMD", F::kTraining, {C::kEmbeddings}, true},

      {Est::kPTrue, "PTrue", "P(True)", F::kReflexive, {C::kReflexive}},
      {Est::kPTrueSampling, "PTrueSampling", "P(True) Sampling", F::kReflexive, {C::kReflexive}},
      {Est::kPTrueEmpirical, "PTrueEmpirical", "P(True) Empirical", F::kReflexive, {C::kReflexive}},

      {Est::kNumSet, "NumSet", "NumSet", F::kBlackbox, {C::kSamples, C::kRelations}},
      {Est::kLabelProb, "LabelProb", "LabelProb", F::kBlackbox, {C::kSamples, C::kRelations}},
      {Est::kKle, "KLE", "Kernel Language Entropy (KLE)", F::kBlackbox, {C::kSamples, C::kRelations}},
      {Est::kEigValLapEntail, "EigValLap-Entail", "EigValLap NLI (Entail)", F::kBlackbox, {C::kSamples, C::kRelations}},
      {Est::kEigValLapContra, "EigValLap-Contra", "EigValLap NLI (Contra)", F::kBlackbox, {C::kSamples, C::kRelations}},
      {Est::kEigValLapJaccard, "EigValLap-Jaccard", "EigValLap Jaccard", F::kBlackbox, {C::kSamples}},
      {Est::kEccEntail, "Ecc-Entail", "Eccentricity NLI (Entail)", F::kBlackbox, {C::kSamples, C::kRelations}},
      {Est::kEccContra, "Ecc-Contra", "Eccentricity NLI (Contra)", F::kBlackbox, {C::kSamples, C::kRelations}},
      {Est::kEccJaccard, "Ecc-Jaccard", "Eccentricity Jaccard", F::kBlackbox, {C::kSamples}},
      {Est::kDegMatEntail, "DegMat-Entail", "DegMat NLI (Entail)", F::kBlackbox, {C::kSamples, C::kRelations}},
      {Est::kDegMatContra, "DegMat-Contra", "DegMat NLI (Contra)", F::kBlackbox, {C::kSamples, C::kRelations}},
      {Est::kDegMatJaccard, "DegMat-Jaccard", "DegMat Jaccard", F::kBlackbox, {C::kSamples}},
      {Est::kLuq, "LUQ", "LUQ", F::kBlackbox, {C::kRelations}},
      {Est::kLexSimRougeL, "LexSim-ROUGE-L", "Lexical Similarity (ROUGE-L)", F::kBlackbox, {C::kSamples}},
      {Est::kLexSimBleu, "LexSim-BLEU", "Lexical Similarity (BLEU)", F::kBlackbox, {C::kSamples}},
  };
  return kCatalog;
}

inline const EstimatorInfo& info(Est e) { return catalog()[static_cast<std::size_t>(e)]; }

inline std::string valid_estimator_ids() {
  std::string out;
  for (const auto& e : catalog()) {
    if (!out.empty()) out += ", ";
    out += e.id;
  }
  return out;
}

inline Est parse_estimator(std::string_view id) {
  for (const auto& e : catalog())
    if (e.id == id) return e.est;
  throw ConfigError("unknown estimator '" + std::string(id) + "'; valid ids: " + valid_estimator_ids());
}

/// Hyperparameters; defaults are the benchmark's reference settings.
struct EstimatorConfig {
  double renyi_alpha = 0.5;
  double temperature = 2.0;  // Renyi / Fisher-Rao
  double cpmi_tau = 0.0656;
  double cpmi_lambda = 3.599;
  double sar_tau = 1.0;
  double rauq_alpha = 0.5;
  double attention_eps = 1e-12;
  double eigenscore_reg = 1e-3;
  double kle_t = 0.3;
  int ecc_k = 0;  // 0 = adaptive (eigenvalues below ecc_threshold)
  double ecc_threshold = 0.9;
  std::optional<double> ridge;  // default: 1e-6 * mean variance
  int rde_components = 0;       // 0 = min(100, n - 1)
  int mcd_restarts = 50;
  std::uint64_t seed = 42;
};

// ---------------------------------------------------------------------------
// Training-based models

struct TrainingModels {
  std::optional<density::GaussianModel> task;
  std::optional<density::GaussianModel> background;
  std::optional<density::RobustProjectedModel> rde;
  density::EcdfTable ppl_table;
  density::EcdfTable md_table;
  density::EcdfTable rmd_table;
};

namespace detail {

inline Eigen::VectorXd to_vector(const std::vector<double>& v) {
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

inline Eigen::MatrixXd embedding_rows(std::span<const GenerationTrace* const> traces) {
  if (traces.empty()) return {};
  const auto d = static_cast<Eigen::Index>(traces.front()->greedy_embedding->size());
  Eigen::MatrixXd m(static_cast<Eigen::Index>(traces.size()), d);
  for (std::size_t i = 0; i < traces.size(); ++i) {
    const auto& e = *traces[i]->greedy_embedding;
    if (static_cast<Eigen::Index>(e.size()) != d)
      throw DataError("instance '" + traces[i]->instance_id + "': field 'greedy_embedding' has dimension " +
                      std::to_string(e.size()) + ", expected " + std::to_string(d));
    m.row(static_cast<Eigen::Index>(i)) = to_vector(e).transpose();
  }
  return m;
}

inline std::vector<const GenerationTrace*> with_embeddings(std::span<const GenerationTrace> traces) {
  std::vector<const GenerationTrace*> out;
  for (const auto& t : traces)
    if (t.greedy_embedding) out.push_back(&t);
  return out;
}

}  // namespace detail

/// Fits task, background and robust models plus the HUQ rank tables.
/// Models that cannot be fitted (fewer than two embedded traces) are left
/// empty and their estimators abstain.
inline TrainingModels fit_training(std::span<const GenerationTrace> train,
                                   std::span<const GenerationTrace> background,
                                   const EstimatorConfig& cfg) {
  TrainingModels m;
  const auto task_traces = detail::with_embeddings(train);
  if (task_traces.size() >= 2) {
    const Eigen::MatrixXd x = detail::embedding_rows(task_traces);
    m.task = density::fit_gaussian(x, cfg.ridge);
    density::RdeConfig rc;
    rc.components = cfg.rde_components;
    rc.mcd.restarts = cfg.mcd_restarts;
    rc.mcd.seed = cfg.seed;
    rc.ridge = cfg.ridge;
    m.rde = density::rde_fit(x, rc);
    std::vector<double> ppl, md;
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
      ppl.push_back(logit::nll_scores(task_traces[static_cast<std::size_t>(i)]->response).ppl.value());
      md.push_back(m.task->distance(x.row(i).transpose()));
    }
    m.ppl_table = density::EcdfTable(std::move(ppl));
    m.md_table = density::EcdfTable(std::move(md));
  } else if (!train.empty()) {
    warn("fewer than 2 training traces carry embeddings; training-based estimators abstain");
  }
  const auto bg_traces = detail::with_embeddings(background);
  if (bg_traces.size() >= 2) {
    m.background = density::fit_gaussian(detail::embedding_rows(bg_traces), cfg.ridge);
    if (m.task) {
      if (m.background->dim() != m.task->dim())
        throw DataError("background embeddings have dimension " + std::to_string(m.background->dim()) +
                        ", training embeddings " + std::to_string(m.task->dim()));
      std::vector<double> rmd;
      for (const auto* t : task_traces)
        rmd.push_back(density::relative_md(detail::to_vector(*t->greedy_embedding), *m.task, *m.background));
      m.rmd_table = density::EcdfTable(std::move(rmd));
    }
  }
  return m;
}

inline nlohmann::ordered_json to_json(const TrainingModels& m) {
  nlohmann::ordered_json j = nlohmann::ordered_json::object();
  if (m.task) j["task"] = density::to_json(*m.task);
  if (m.background) j["background"] = density::to_json(*m.background);
  if (m.rde) j["rde"] = density::to_json(*m.rde);
  if (!m.ppl_table.empty()) j["ppl_table"] = m.ppl_table.values();
  if (!m.md_table.empty()) j["md_table"] = m.md_table.values();
  if (!m.rmd_table.empty()) j["rmd_table"] = m.rmd_table.values();
  return j;
}

inline TrainingModels training_models_from_json(const nlohmann::ordered_json& j) {
  TrainingModels m;
  try {
    if (j.contains("task")) m.task = density::gaussian_from_json(j.at("task"));
    if (j.contains("background")) m.background = density::gaussian_from_json(j.at("background"));
    if (j.contains("rde")) m.rde = density::rde_from_json(j.at("rde"));
    if (j.contains("ppl_table")) m.ppl_table = density::EcdfTable(j.at("ppl_table").get<std::vector<double>>());
    if (j.contains("md_table")) m.md_table = density::EcdfTable(j.at("md_table").get<std::vector<double>>());
    if (j.contains("rmd_table")) m.rmd_table = density::EcdfTable(j.at("rmd_table").get<std::vector<double>>());
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("model file: ") + e.what());
  }
  return m;
}

// ---------------------------------------------------------------------------
// Scoring

/// Lazily computed intermediates for one trace.
class TraceContext {
 public:
  TraceContext(const GenerationTrace& trace, const EstimatorConfig& cfg, const TrainingModels* models)
      : trace_(trace), cfg_(cfg), models_(models) {}

  const GenerationTrace& trace() const { return trace_; }
  const EstimatorConfig& config() const { return cfg_; }
  const TrainingModels* models() const { return models_; }

  const logit::NllScores& nll() {
    if (!nll_) nll_ = logit::nll_scores(trace_.response);
    return *nll_;
  }

  const sample::SemanticPartition& partition() {
    if (!partition_) partition_ = sample::cluster_semantic(*trace_.relations);
    return *partition_;
  }

  const std::optional<internal::AttentionExtract>& attention() {
    if (!attention_) attention_ = internal::extract_attention(trace_);
    return *attention_;
  }

  const std::optional<blackbox::RelationGraph>& graph(blackbox::GraphMode mode) {
    auto& slot = graphs_[static_cast<std::size_t>(mode)];
    if (!slot) slot = blackbox::build_graph(trace_, mode);
    return *slot;
  }

  const Eigen::VectorXd& embedding() {
    if (!embedding_) embedding_ = detail::to_vector(*trace_.greedy_embedding);
    return *embedding_;
  }

  ScoreValue md() {
    if (!md_) md_ = models_ && models_->task ? ScoreValue(models_->task->distance(embedding())) : ScoreValue();
    return *md_;
  }

  ScoreValue rmd() {
    if (!rmd_)
      rmd_ = models_ && models_->task && models_->background
                 ? ScoreValue(density::relative_md(embedding(), *models_->task, *models_->background))
                 : ScoreValue();
    return *rmd_;
  }

 private:
  const GenerationTrace& trace_;
  const EstimatorConfig& cfg_;
  const TrainingModels* models_;
  std::optional<logit::NllScores> nll_;
  std::optional<sample::SemanticPartition> partition_;
  std::optional<std::optional<internal::AttentionExtract>> attention_;
  std::array<std::optional<std::optional<blackbox::RelationGraph>>, 3> graphs_;
  std::optional<Eigen::VectorXd> embedding_;
  std::optional<ScoreValue> md_;
  std::optional<ScoreValue> rmd_;
};

/// True iff every declared input of `e` is present on the trace.
inline bool inputs_available(const GenerationTrace& trace, Est e) {
  const auto& needs = info(e).needs;
  return std::all_of(needs.begin(), needs.end(), [&](Capability c) { return require(trace, c); });
}

namespace detail {

inline ScoreValue snapped(ScoreValue v) { return v ? ScoreValue(snap_to_grid(v.value())) : v; }

inline ScoreValue graph_score(TraceContext& ctx, blackbox::GraphMode mode, int kind) {
  const auto& g = ctx.graph(mode);
  if (!g) return ScoreValue::missing();
  switch (kind) {
    case 0:
      return snapped(blackbox::eig_val_laplacian(*g));
    case 1:
      return snapped(blackbox::eccentricity(*g, {ctx.config().ecc_k, ctx.config().ecc_threshold}));
    default:
      return snapped(blackbox::degmat(*g));
  }
}

inline ScoreValue compute(TraceContext& ctx, Est e) {
  using blackbox::GraphMode;
  const auto& t = ctx.trace();
  const auto& cfg = ctx.config();
  const std::span<const TokenStep> steps = t.response;
  switch (e) {
    case Est::kMsp:
      return ctx.nll().msp;
    case Est::kPpl:
      return ctx.nll().ppl;
    case Est::kMte:
      return logit::mean_token_entropy(steps);
    case Est::kPmi:
      return logit::pmi_scores(steps, logit::PmiMode::kPmi, cfg.cpmi_tau, cfg.cpmi_lambda);
    case Est::kCpmi:
      return logit::pmi_scores(steps, logit::PmiMode::kCpmi, cfg.cpmi_tau, cfg.cpmi_lambda);
    case Est::kSelfCertainty:
      return logit::uniform_divergence(steps, logit::UniformMode::kSelfCertainty, cfg.renyi_alpha, cfg.temperature);
    case Est::kRenyi:
      return logit::uniform_divergence(steps, logit::UniformMode::kRenyi, cfg.renyi_alpha, cfg.temperature);
    case Est::kFisherRao:
      return logit::uniform_divergence(steps, logit::UniformMode::kFisherRao, cfg.renyi_alpha, cfg.temperature);
    case Est::kTokenSar:
      return logit::token_sar(steps);
    case Est::kCcp:
      return logit::ccp(steps);

    case Est::kMcse:
      return sample::mc_entropy(t.samples, false);
    case Est::kMcnse:
      return sample::mc_entropy(t.samples, true);
    case Est::kSemanticEntropy:
      return sample::semantic_entropy(ctx.partition(), t.samples);
    case Est::kSemanticDensity: {
      const auto& k = *t.relations->kernel_scores;
      return sample::semantic_density(t.samples, std::span<const double>(k.data(), static_cast<std::size_t>(k.size())),
                                      std::exp(-ctx.nll().ppl.value()));
    }
    case Est::kSentenceSar:
      return sample::sentence_sar(t.samples, *t.relations->sample_sim, cfg.sar_tau);
    case Est::kSar:
      return sample::sar(t.samples, *t.relations->sample_sim, cfg.sar_tau);
    case Est::kCocoaMsp:
      return sample::cocoa(ctx.nll().msp, *t.relations->sent_sim);
    case Est::kCocoaPpl:
      return sample::cocoa(ctx.nll().ppl, *t.relations->sent_sim);
    case Est::kCocoaMte:
      return sample::cocoa(logit::mean_token_entropy(steps), *t.relations->sent_sim);

    case Est::kAttentionScore:
      return ctx.attention() ? internal::attention_score(*ctx.attention(), cfg.attention_eps) : ScoreValue();
    case Est::kRauq:
      return ctx.attention() ? internal::rauq(steps, *ctx.attention(), cfg.rauq_alpha) : ScoreValue();
    case Est::kCsl:
      return ctx.attention() ? internal::csl(steps, *ctx.attention()) : ScoreValue();
    case Est::kEigenScore: {
      const auto emb = internal::EmbeddingSet::from_samples(t.samples);
      return emb ? internal::eigenscore(*emb, cfg.eigenscore_reg) : ScoreValue();
    }

    case Est::kMd:
      return ctx.md();
    case Est::kRmd:
      return ctx.rmd();
    case Est::kRde:
      return ctx.models() && ctx.models()->rde ? ScoreValue(density::rde_score(ctx.embedding(), *ctx.models()->rde))
                                               : ScoreValue();
    case Est::kHuqMd:
      return ctx.models() ? density::huq(ctx.nll().ppl, ctx.md(), ctx.models()->ppl_table, ctx.models()->md_table)
                          : ScoreValue();
    case Est::kHuqRmd:
      return ctx.models() ? density::huq(ctx.nll().ppl, ctx.rmd(), ctx.models()->ppl_table, ctx.models()->rmd_table)
                          : ScoreValue();

    case Est::kPTrue:
      return logit::ptrue_nll(t.reflexive, logit::PTrueVariant::kPTrue);
    case Est::kPTrueSampling:
      return logit::ptrue_nll(t.reflexive, logit::PTrueVariant::kPTrueSampling);
    case Est::kPTrueEmpirical:
      return blackbox::ptrue_empirical(t.reflexive);

    case Est::kNumSet:
      return blackbox::num_set(ctx.partition());
    case Est::kLabelProb:
      return blackbox::label_prob(ctx.partition());
    case Est::kKle: {
      const auto& g = ctx.graph(GraphMode::kNliEntail);
      return g ? snapped(blackbox::kle(*g, cfg.kle_t)) : ScoreValue();
    }
    case Est::kEigValLapEntail:
      return graph_score(ctx, GraphMode::kNliEntail, 0);
    case Est::kEigValLapContra:
      return graph_score(ctx, GraphMode::kNliContra, 0);
    case Est::kEigValLapJaccard:
      return graph_score(ctx, GraphMode::kJaccard, 0);
    case Est::kEccEntail:
      return graph_score(ctx, GraphMode::kNliEntail, 1);
    case Est::kEccContra:
      return graph_score(ctx, GraphMode::kNliContra, 1);
    case Est::kEccJaccard:
      return graph_score(ctx, GraphMode::kJaccard, 1);
    case Est::kDegMatEntail:
      return graph_score(ctx, GraphMode::kNliEntail, 2);
    case Est::kDegMatContra:
      return graph_score(ctx, GraphMode::kNliContra, 2);
    case Est::kDegMatJaccard:
      return graph_score(ctx, GraphMode::kJaccard, 2);
    case Est::kLuq:
      return snapped(blackbox::luq(*t.relations->soft_entail));
    case Est::kLexSimRougeL:
      return snapped(blackbox::lexical_similarity(t.samples, blackbox::LexicalMetric::kRougeL));
    case Est::kLexSimBleu:
      return snapped(blackbox::lexical_similarity(t.samples, blackbox::LexicalMetric::kBleu));
    case Est::kCount:
      break;
  }
  return ScoreValue::missing();
}

}  // namespace detail

/// Scores one trace with each selected estimator. Estimators whose inputs
/// are absent, or whose training models are unavailable, abstain.
inline std::vector<ScoreValue> score_trace(const GenerationTrace& trace, std::span<const Est> selected,
                                           const EstimatorConfig& cfg, const TrainingModels* models) {
  TraceContext ctx(trace, cfg, models);
  std::vector<ScoreValue> out;
  out.reserve(selected.size());
  for (Est e : selected) {
    if (!inputs_available(trace, e) || (info(e).trained && !models)) {
      out.push_back(ScoreValue::missing());
      continue;
    }
    ScoreValue v = detail::compute(ctx, e);
    if (v && !std::isfinite(v.value())) v = ScoreValue::missing();
    out.push_back(v);
  }
  return out;
}

inline ScoreValue score_one(const GenerationTrace& trace, Est e, const EstimatorConfig& cfg,
                            const TrainingModels* models) {
  const std::array<Est, 1> one{e};
  return score_trace(trace, one, cfg, models).front();
}

inline std::vector<Est> all_estimators() {
  std::vector<Est> out;
  for (const auto& e : catalog()) out.push_back(e.est);
  return out;
}

}  // namespace uqbench

#endif  // UQBENCH_REGISTRY_HPP_
