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

#ifndef UQBENCH_CONFIG_HPP_
#define UQBENCH_CONFIG_HPP_

// Run configuration. The file format is one `key = value` per line with
// dotted keys; `#` starts a comment. Command-line flags are applied on top
// of the file through the same key names.
//
//   # hyperparameters
//   renyi.alpha = 0.5
//   cpmi.lambda = 3.599
//   estimators = MSP, PPL, SemanticEntropy

#include <algorithm>
#include <charconv>
#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "uqbench/common.hpp"
#include "uqbench/registry.hpp"

namespace uqbench {

struct SynthParams {
  std::size_t n = 100;
  std::size_t t_min = 5;
  std::size_t t_max = 20;
  std::size_t samples = 5;
  double hallucination_rate = 0.3;
  double signal = 1.0;  // 1: planted score determined by hallucination; 0: independent
  double train_fraction = 0.0;
  std::uint64_t seed = 42;
};

struct RunConfig {
  std::string traces;
  std::string train_traces;
  std::string background_traces;
  std::string models;  // load fitted training models instead of fitting
  std::string out;

  std::vector<Est> estimators;  // after include/exclude resolution
  bool estimators_explicit = false;

  EstimatorConfig est;

  // evaluation
  std::size_t rce_bins = 20;
  std::size_t replicates = 1000;
  std::uint64_t seed = 42;
  double threshold = 0.5;
  bool group_by_query = false;

  unsigned threads = 0;  // 0 = hardware concurrency

  SynthParams synth;
};

using ConfigMap = std::map<std::string, std::string, std::less<>>;

namespace config_detail {

inline std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

inline std::vector<std::string> split_list(std::string_view s) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= s.size()) {
    auto comma = s.find(',', start);
    if (comma == std::string_view::npos) comma = s.size();
    auto item = trim(s.substr(start, comma - start));
    if (!item.empty()) out.push_back(std::move(item));
    start = comma + 1;
  }
  return out;
}

template <typename T>
T parse_number(const std::string& key, const std::string& v) {
  T out{};
  const auto res = std::from_chars(v.data(), v.data() + v.size(), out);
  if (res.ec != std::errc() || res.ptr != v.data() + v.size())
    throw ConfigError("config key '" + key + "': invalid value '" + v + "'");
  return out;
}

inline bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw ConfigError("config key '" + key + "': expected true/false, got '" + v + "'");
}

}  // namespace config_detail

inline const std::vector<std::string_view>& known_config_keys() {
  static const std::vector<std::string_view> keys = {
      "traces", "train_traces", "background_traces", "models", "out", "estimators", "exclude", "threads",
      "seed", "replicates", "rce.bins", "eval.threshold", "bootstrap.group_by_query",
      "renyi.alpha", "renyi.tau", "cpmi.tau", "cpmi.lambda", "sar.tau", "rauq.alpha", "attention_score.eps",
      "eigenscore.reg", "kle.t", "eccentricity.k", "eccentricity.threshold", "density.ridge",
      "rde.components", "mcd.restarts",
      "synth.n", "synth.t_min", "synth.t_max", "synth.samples", "synth.hallucination_rate", "synth.signal",
      "synth.train_fraction",
  };
  return keys;
}

/// Parses `key = value` lines. Unknown keys and duplicates are errors.
inline ConfigMap parse_config(std::istream& is, const std::string& source = "config") {
  ConfigMap out;
  std::string line;
  std::size_t lineno = 0;
  const auto& keys = known_config_keys();
  while (std::getline(is, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    const auto body = config_detail::trim(line);
    if (body.empty()) continue;
    const auto eq = body.find('=');
    const std::string where = source + ":" + std::to_string(lineno);
    if (eq == std::string::npos) throw ConfigError(where + ": expected 'key = value'");
    auto key = config_detail::trim(std::string_view(body).substr(0, eq));
    auto value = config_detail::trim(std::string_view(body).substr(eq + 1));
    if (std::find(keys.begin(), keys.end(), key) == keys.end())
      throw ConfigError(where + ": unknown key '" + key + "'");
    if (!out.emplace(key, value).second) throw ConfigError(where + ": duplicate key '" + key + "'");
  }
  return out;
}

inline ConfigMap load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  return parse_config(in, path);
}

/// Resolves a key map (file values already overridden by flags) into a
/// RunConfig. Defaults apply to absent keys.
inline RunConfig resolve_config(const ConfigMap& m) {
  using config_detail::parse_bool;
  using config_detail::parse_number;
  RunConfig c;
  for (const auto& [key, value] : m) {
    const auto& keys = known_config_keys();
    if (std::find(keys.begin(), keys.end(), key) == keys.end())
      throw ConfigError("unknown config key '" + key + "'");
  }
  auto get = [&](std::string_view key) -> const std::string* {
    const auto it = m.find(key);
    return it == m.end() ? nullptr : &it->second;
  };
  auto num = [&]<typename T>(std::string_view key, T& slot) {
    if (const auto* v = get(key)) slot = parse_number<T>(std::string(key), *v);
  };
  if (const auto* v = get("traces")) c.traces = *v;
  if (const auto* v = get("train_traces")) c.train_traces = *v;
  if (const auto* v = get("background_traces")) c.background_traces = *v;
  if (const auto* v = get("models")) c.models = *v;
  if (const auto* v = get("out")) c.out = *v;

  std::vector<Est> selected;
  const auto* inc = get("estimators");
  if (inc && config_detail::trim(*inc) != "all") {
    c.estimators_explicit = true;
    for (const auto& id : config_detail::split_list(*inc)) {
      const Est e = parse_estimator(id);
      if (std::find(selected.begin(), selected.end(), e) == selected.end()) selected.push_back(e);
    }
  } else {
    selected = all_estimators();
  }
  if (const auto* v = get("exclude"))
    for (const auto& id : config_detail::split_list(*v)) {
      const Est e = parse_estimator(id);
      selected.erase(std::remove(selected.begin(), selected.end(), e), selected.end());
    }
  c.estimators = std::move(selected);

  num("threads", c.threads);
  num("seed", c.seed);
  c.est.seed = c.seed;
  c.synth.seed = c.seed;
  num("replicates", c.replicates);
  num("rce.bins", c.rce_bins);
  num("eval.threshold", c.threshold);
  if (const auto* v = get("bootstrap.group_by_query")) c.group_by_query = parse_bool("bootstrap.group_by_query", *v);

  num("renyi.alpha", c.est.renyi_alpha);
  num("renyi.tau", c.est.temperature);
  num("cpmi.tau", c.est.cpmi_tau);
  num("cpmi.lambda", c.est.cpmi_lambda);
  num("sar.tau", c.est.sar_tau);
  num("rauq.alpha", c.est.rauq_alpha);
  num("attention_score.eps", c.est.attention_eps);
  num("eigenscore.reg", c.est.eigenscore_reg);
  num("kle.t", c.est.kle_t);
  num("eccentricity.k", c.est.ecc_k);
  num("eccentricity.threshold", c.est.ecc_threshold);
  if (const auto* v = get("density.ridge")) c.est.ridge = parse_number<double>("density.ridge", *v);
  num("rde.components", c.est.rde_components);
  num("mcd.restarts", c.est.mcd_restarts);

  num("synth.n", c.synth.n);
  num("synth.t_min", c.synth.t_min);
  num("synth.t_max", c.synth.t_max);
  num("synth.samples", c.synth.samples);
  num("synth.hallucination_rate", c.synth.hallucination_rate);
  num("synth.signal", c.synth.signal);
  num("synth.train_fraction", c.synth.train_fraction);

  // Range checks.
  auto positive = [](double v) { return v > 0.0; };
  if (!positive(c.est.temperature)) throw ConfigError("renyi.tau must be positive");
  if (!(c.est.renyi_alpha > 0.0) || c.est.renyi_alpha == 1.0)
    throw ConfigError("renyi.alpha must be positive and different from 1");
  if (!positive(c.est.sar_tau)) throw ConfigError("sar.tau must be positive");
  if (!positive(c.est.kle_t)) throw ConfigError("kle.t must be positive");
  if (!(c.est.rauq_alpha >= 0.0 && c.est.rauq_alpha <= 1.0)) throw ConfigError("rauq.alpha must lie in [0,1]");
  if (c.est.ecc_k < 0) throw ConfigError("eccentricity.k must be >= 0");
  if (c.est.ridge && *c.est.ridge < 0.0) throw ConfigError("density.ridge must be >= 0");
  if (c.est.mcd_restarts < 1) throw ConfigError("mcd.restarts must be >= 1");
  if (c.rce_bins < 2) throw ConfigError("rce.bins must be >= 2");
  if (c.replicates < 2) throw ConfigError("replicates must be >= 2");
  if (!(c.threshold > 0.0 && c.threshold <= 1.0)) throw ConfigError("eval.threshold must lie in (0,1]");
  return c;
}

}  // namespace uqbench

#endif  // UQBENCH_CONFIG_HPP_
