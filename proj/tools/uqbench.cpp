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

// uqbench command-line driver.
//
//   uqbench synth  --out traces.jsonl [--seed S] [--n N] [--signal s] ...
//   uqbench score  --traces t.jsonl [--train-traces ..] [--background-traces ..] --out DIR
//   uqbench eval   --scores DIR/scores.csv --traces t.jsonl [...] --out DIR
//   uqbench report --traces t.jsonl [...] --out DIR
//
// Exit codes: 0 success, 2 configuration/usage error, 3 data error.

#include <exception>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "uqbench/pipeline.hpp"

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitData = 3;

// Flag values; only flags that were given override the config file.
struct Flags {
  std::string config;
  std::vector<std::string> traces;
  std::vector<std::string> scores;
  std::string train_traces;
  std::string background_traces;
  std::string estimators;
  std::string out;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> replicates;
  std::optional<unsigned> threads;
  // synth
  std::optional<std::size_t> n, samples, t_min, t_max;
  std::optional<double> hallucination_rate, signal, train_fraction;
};

template <typename T>
void set_if(uqbench::ConfigMap& m, const char* key, const std::optional<T>& v) {
  if (v) m[key] = std::to_string(*v);
}

void set_double(uqbench::ConfigMap& m, const char* key, const std::optional<double>& v) {
  if (v) m[key] = uqbench::format_double(*v);
}

uqbench::RunConfig build_config(const Flags& f, bool single_traces) {
  uqbench::ConfigMap m;
  if (!f.config.empty()) m = uqbench::load_config(f.config);
  if (single_traces && !f.traces.empty()) {
    if (f.traces.size() > 1) throw uqbench::ConfigError("--traces given more than once");
    m["traces"] = f.traces.front();
  }
  if (!f.train_traces.empty()) m["train_traces"] = f.train_traces;
  if (!f.background_traces.empty()) m["background_traces"] = f.background_traces;
  if (!f.estimators.empty()) m["estimators"] = f.estimators;
  if (!f.out.empty()) m["out"] = f.out;
  set_if(m, "seed", f.seed);
  set_if(m, "replicates", f.replicates);
  set_if(m, "threads", f.threads);
  set_if(m, "synth.n", f.n);
  set_if(m, "synth.samples", f.samples);
  set_if(m, "synth.t_min", f.t_min);
  set_if(m, "synth.t_max", f.t_max);
  set_double(m, "synth.hallucination_rate", f.hallucination_rate);
  set_double(m, "synth.signal", f.signal);
  set_double(m, "synth.train_fraction", f.train_fraction);
  return uqbench::resolve_config(m);
}

void common_flags(CLI::App* cmd, Flags& f) {
  cmd->add_option("--config", f.config, "key = value configuration file");
  cmd->add_option("--out", f.out, "output directory (trace file for synth)");
  cmd->add_option("--seed", f.seed, "master seed (bootstrap, MCD restarts, synth)");
  cmd->add_option("--threads", f.threads, "worker threads (0 = all cores)");
}

void scoring_flags(CLI::App* cmd, Flags& f) {
  cmd->add_option("--traces", f.traces, "trace file (.jsonl or .jsonl.gz)");
  cmd->add_option("--train-traces", f.train_traces, "additional training traces");
  cmd->add_option("--background-traces", f.background_traces, "background corpus for RMD");
  cmd->add_option("--estimators", f.estimators, "comma-separated estimator ids (default: all)");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Trace-based uncertainty scoring and evaluation"};
  app.require_subcommand(1);
  Flags f;

  auto* synth = app.add_subcommand("synth", "generate synthetic traces with a planted signal");
  common_flags(synth, f);
  synth->add_option("--n", f.n, "number of instances");
  synth->add_option("--samples", f.samples, "samples per instance");
  synth->add_option("--t-min", f.t_min, "minimum response length");
  synth->add_option("--t-max", f.t_max, "maximum response length");
  synth->add_option("--hallucination-rate", f.hallucination_rate, "fraction of hallucinated instances");
  synth->add_option("--signal", f.signal, "planted signal strength in [0,1]");
  synth->add_option("--train-fraction", f.train_fraction, "fraction of instances in the train split");

  auto* score = app.add_subcommand("score", "score traces with the enabled estimators");
  common_flags(score, f);
  scoring_flags(score, f);

  auto* eval = app.add_subcommand("eval", "evaluate score tables against quality labels");
  common_flags(eval, f);
  eval->add_option("--scores", f.scores, "score table (repeat once per panel)");
  eval->add_option("--traces", f.traces, "trace file with quality labels (repeat, paired with --scores)");
  eval->add_option("--replicates", f.replicates, "bootstrap replicates");

  auto* report = app.add_subcommand("report", "score and evaluate in one pass");
  common_flags(report, f);
  scoring_flags(report, f);
  report->add_option("--replicates", f.replicates, "bootstrap replicates");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    if (synth->parsed()) {
      const auto cfg = build_config(f, true);
      const auto traces = uqbench::cmd_synth(cfg);
      std::cerr << "wrote " << traces.size() << " traces to " << cfg.out << '\n';
    } else if (score->parsed()) {
      const auto cfg = build_config(f, true);
      const auto run = uqbench::cmd_score(cfg);
      std::cerr << "scored " << run.table.cols() << " instances with " << run.table.rows() << " estimators\n";
    } else if (eval->parsed()) {
      const auto cfg = build_config(f, false);
      const auto rep = uqbench::cmd_eval(cfg, f.scores, f.traces);
      std::cerr << "evaluated " << rep.panels.size() << " panel(s)\n";
    } else if (report->parsed()) {
      const auto cfg = build_config(f, true);
      const auto rep = uqbench::cmd_report(cfg);
      std::cerr << "report written for " << rep.estimators.size() << " estimators\n";
    }
  } catch (const uqbench::ConfigError& e) {
    std::cerr << "uqbench: config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const uqbench::DataError& e) {
    std::cerr << "uqbench: data error: " << e.what() << '\n';
    return kExitData;
  } catch (const std::exception& e) {
    std::cerr << "uqbench: error: " << e.what() << '\n';
    return kExitData;
  }
  return 0;
}
