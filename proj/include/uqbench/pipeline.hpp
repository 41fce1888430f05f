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

#ifndef UQBENCH_PIPELINE_HPP_
#define UQBENCH_PIPELINE_HPP_

#include <cstring>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "uqbench/common.hpp"
#include "uqbench/config.hpp"
#include "uqbench/parallel.hpp"
#include "uqbench/registry.hpp"
#include "uqbench/report.hpp"
#include "uqbench/score_table.hpp"
#include "uqbench/synth.hpp"
#include "uqbench/trace_io.hpp"

namespace uqbench {

struct ScoreRun {
  ScoreTable table;
  std::optional<TrainingModels> models;
};

inline bool needs_training(const std::vector<Est>& selected) {
  for (Est e : selected)
    if (info(e).trained) return true;
  return false;
}

/// Scores the eval split of `corpus`. Training models come from the train
/// split of `corpus` plus `train`, or are taken from `preloaded`.
inline ScoreRun score_corpus(const TraceCorpus& corpus, const std::vector<GenerationTrace>& train,
                             const std::vector<GenerationTrace>& background, const RunConfig& cfg,
                             const std::optional<TrainingModels>& preloaded = {}) {
  if (cfg.estimators.empty()) throw ConfigError("no estimator enabled");
  ScoreRun run;
  std::vector<const GenerationTrace*> eval;
  std::vector<GenerationTrace> train_set;
  for (const auto& t : corpus.traces) {
    if (t.split == Split::kEval)
      eval.push_back(&t);
    else
      train_set.push_back(t);
  }
  for (const auto& t : train)
    if (t.split == Split::kTrain) train_set.push_back(t);
  if (needs_training(cfg.estimators)) {
    if (preloaded)
      run.models = preloaded;
    else if (!train_set.empty())
      run.models = fit_training(train_set, background, cfg.est);
    else
      warn("no training traces; training-based estimators abstain");
    if (run.models && !run.models->background)
      warn("no background model; RMD and HUQ-RMD abstain");
  }

  auto& t = run.table;
  for (Est e : cfg.estimators) {
    t.estimators.emplace_back(info(e).id);
    t.families.push_back(info(e).family);
  }
  for (const auto* tr : eval) t.instances.push_back(tr->instance_id);
  t.values.assign(cfg.estimators.size(), std::vector<double>(eval.size(), kMissing));
  const TrainingModels* models = run.models ? &*run.models : nullptr;
  parallel_for(eval.size(), cfg.threads, [&](std::size_t i) {
    const auto scores = score_trace(*eval[i], cfg.estimators, cfg.est, models);
    for (std::size_t r = 0; r < scores.size(); ++r)
      if (scores[r]) t.values[r][i] = scores[r].value();
  });
  if (cfg.estimators_explicit)
    for (std::size_t r = 0; r < t.rows(); ++r)
      if (!t.values[r].empty() &&
          std::all_of(t.values[r].begin(), t.values[r].end(), [](double v) { return std::isnan(v); }))
        warn("estimator '" + t.estimators[r] + "' abstained on every instance (inputs absent)");
  return run;
}

namespace pipeline_detail {

inline std::vector<GenerationTrace> load_optional(const std::string& path) {
  if (path.empty()) return {};
  return load_traces(path).traces;
}

inline void ensure_dir(const std::string& dir) {
  if (dir.empty()) throw ConfigError("an output directory is required (--out)");
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw DataError("cannot create output directory '" + dir + "': " + ec.message());
}

inline std::string join(const std::string& dir, const char* name) {
  return (std::filesystem::path(dir) / name).string();
}

inline std::optional<TrainingModels> load_models(const std::string& path) {
  if (path.empty()) return std::nullopt;
  try {
    return training_models_from_json(nlohmann::ordered_json::parse(read_file(path)));
  } catch (const nlohmann::json::exception& e) {
    throw DataError(path + ": " + e.what());
  }
}

inline EvalOptions eval_options(const RunConfig& cfg) {
  EvalOptions o;
  o.replicates = cfg.replicates;
  o.seed = cfg.seed;
  o.rce_bins = cfg.rce_bins;
  o.threshold = cfg.threshold;
  o.group_by_query = cfg.group_by_query;
  o.threads = cfg.threads;
  return o;
}

inline void write_report(const std::string& dir, const MetricReport& r) {
  write_file(join(dir, "metrics.csv"), metrics_csv(r));
  write_file(join(dir, "redundancy.json"), redundancy_json(r));
  write_file(join(dir, "family_roc.json"), family_roc_json(r));
  write_file(join(dir, "rank_variability.csv"), rank_variability_csv(r));
}

}  // namespace pipeline_detail

/// Builds a panel from a score table and the traces that carry quality
/// labels. Every table column must match an eval trace and vice versa.
inline Panel make_panel(std::string name, ScoreTable table, const TraceCorpus& corpus) {
  std::map<std::string_view, const GenerationTrace*> by_id;
  std::size_t n_eval = 0;
  for (const auto& t : corpus.traces)
    if (t.split == Split::kEval) {
      by_id.emplace(t.instance_id, &t);
      ++n_eval;
    }
  Panel p;
  p.name = std::move(name);
  bool all_query = true;
  for (const auto& id : table.instances) {
    const auto it = by_id.find(id);
    if (it == by_id.end()) throw DataError("panel '" + p.name + "': instance '" + id + "' has no eval trace");
    p.quality.push_back(it->second->quality.value);
    all_query = all_query && it->second->query_id.has_value();
    if (it->second->query_id) p.query_ids.push_back(*it->second->query_id);
  }
  if (!all_query) p.query_ids.clear();
  if (table.instances.size() != n_eval)
    for (const auto& t : corpus.traces)
      if (t.split == Split::kEval &&
          std::find(table.instances.begin(), table.instances.end(), t.instance_id) == table.instances.end())
        throw DataError("panel '" + p.name + "': instance '" + t.instance_id + "' is missing from the score table");
  p.table = std::move(table);
  return p;
}

/// Panel name from a trace path: file name without .gz / .jsonl suffixes.
inline std::string panel_name(const std::string& path) {
  std::string s = std::filesystem::path(path).filename().string();
  for (const char* ext : {".gz", ".jsonl", ".json"})
    if (s.size() > std::strlen(ext) && s.ends_with(ext)) s.resize(s.size() - std::strlen(ext));
  return s;
}

// ---------------------------------------------------------------------------
// Commands

inline ScoreRun cmd_score(const RunConfig& cfg) {
  if (cfg.traces.empty()) throw ConfigError("score: --traces is required");
  pipeline_detail::ensure_dir(cfg.out);
  const auto corpus = load_traces(cfg.traces);
  const auto train = pipeline_detail::load_optional(cfg.train_traces);
  const auto background = pipeline_detail::load_optional(cfg.background_traces);
  auto run = score_corpus(corpus, train, background, cfg, pipeline_detail::load_models(cfg.models));
  write_file(pipeline_detail::join(cfg.out, "scores.csv"), to_csv(run.table));
  if (run.models)
    write_file(pipeline_detail::join(cfg.out, "models.json"), to_json(*run.models).dump() + "\n");
  return run;
}

/// Evaluates (score table, trace file) pairs, one panel each.
inline MetricReport cmd_eval(const RunConfig& cfg, const std::vector<std::string>& score_paths,
                             const std::vector<std::string>& trace_paths) {
  if (score_paths.empty()) throw ConfigError("eval: at least one --scores table is required");
  if (score_paths.size() != trace_paths.size())
    throw ConfigError("eval: give one --traces file per --scores table");
  pipeline_detail::ensure_dir(cfg.out);
  std::vector<Panel> panels;
  std::map<std::string, int> seen;
  for (std::size_t k = 0; k < score_paths.size(); ++k) {
    std::istringstream in(read_file(score_paths[k]));
    auto table = read_csv(in, score_paths[k]);
    std::string name = panel_name(trace_paths[k]);
    if (const int dup = seen[name]++; dup > 0) name += "#" + std::to_string(dup + 1);
    panels.push_back(make_panel(std::move(name), std::move(table), load_traces(trace_paths[k])));
  }
  auto report = evaluate(panels, pipeline_detail::eval_options(cfg));
  pipeline_detail::write_report(cfg.out, report);
  return report;
}

/// Fused score + eval over a single trace file.
inline MetricReport cmd_report(const RunConfig& cfg) {
  auto run = cmd_score(cfg);
  const auto corpus = load_traces(cfg.traces);
  std::vector<Panel> panels;
  panels.push_back(make_panel(panel_name(cfg.traces), std::move(run.table), corpus));
  auto report = evaluate(panels, pipeline_detail::eval_options(cfg));
  pipeline_detail::write_report(cfg.out, report);
  return report;
}

inline std::vector<GenerationTrace> cmd_synth(const RunConfig& cfg) {
  if (cfg.out.empty()) throw ConfigError("synth: --out trace file is required");
  auto traces = synth_traces(cfg.synth);
  const auto parent = std::filesystem::path(cfg.out).parent_path();
  if (!parent.empty()) {
    std::error_code ec;
    std::filesystem::create_directories(parent, ec);
  }
  write_traces(cfg.out, traces);
  return traces;
}

}  // namespace uqbench

#endif  // UQBENCH_PIPELINE_HPP_
