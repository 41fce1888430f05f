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

#ifndef UQBENCH_REPORT_HPP_
#define UQBENCH_REPORT_HPP_

// Evaluation of one or more score tables ("panels") and the report files:
//
//   metrics.csv           per panel and estimator: AUROC, PRR, RCE +- bootstrap std
//   redundancy.json       Spearman matrices, Kendall profile matrices, dendrograms
//   family_roc.json       per-family mean ROC on a fixed FPR grid
//   rank_variability.csv  spread of each estimator's within-panel AUROC rank

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "uqbench/common.hpp"
#include "uqbench/eval/bootstrap.hpp"
#include "uqbench/eval/family_roc.hpp"
#include "uqbench/eval/metrics.hpp"
#include "uqbench/eval/redundancy.hpp"
#include "uqbench/parallel.hpp"
#include "uqbench/registry.hpp"
#include "uqbench/score_table.hpp"

namespace uqbench {

struct EvalOptions {
  std::size_t replicates = 1000;
  std::uint64_t seed = 42;
  std::size_t rce_bins = 20;
  double threshold = 0.5;
  bool group_by_query = false;
  unsigned threads = 1;
};

/// A score table together with per-instance quality (aligned by column).
struct Panel {
  std::string name;
  ScoreTable table;
  std::vector<double> quality;
  std::vector<std::string> query_ids;  // empty unless every instance has one
};

struct EstimatorMetrics {
  std::string id;
  Family family = Family::kInformation;
  std::size_t n_scored = 0;
  eval::BootstrapResult auroc;
  eval::BootstrapResult prr;
  eval::BootstrapResult rce;
};

struct PanelReport {
  std::string name;
  std::vector<EstimatorMetrics> rows;
  Eigen::MatrixXd spearman;
  std::vector<eval::Merge> spearman_clusters;
  std::map<std::string, eval::MeanCurve> family_roc;
};

struct RankVariability {
  std::string id;
  std::size_t panels_used = 0;
  std::size_t panels_missing = 0;
  double mean_rank = eval::kNaN;
  double rank_std = eval::kNaN;
};

struct MetricReport {
  std::vector<PanelReport> panels;
  std::vector<std::string> estimators;  // union over panels, first-seen order
  std::vector<Family> families;
  Eigen::MatrixXd spearman_mean;
  std::vector<eval::Merge> spearman_clusters;
  std::map<std::string, Eigen::MatrixXd> kendall;  // by metric
  std::vector<eval::Merge> kendall_clusters;
  std::map<std::string, eval::MeanCurve> family_roc;
  std::vector<RankVariability> rank_variability;
};

namespace report_detail {

// Metrics on the instances in `idx` (with repetition) where the score is
// defined.
struct Triple {
  ScoreValue auroc, prr, rce;
};

inline Triple metrics_on(const std::vector<double>& scores, const std::vector<double>& quality,
                         const std::vector<int>& labels, const std::vector<std::size_t>& idx,
                         std::size_t bins) {
  std::vector<double> s, q;
  std::vector<int> l;
  s.reserve(idx.size());
  for (std::size_t i : idx)
    if (!std::isnan(scores[i])) {
      s.push_back(scores[i]);
      q.push_back(quality[i]);
      l.push_back(labels[i]);
    }
  Triple t;
  t.auroc = eval::auroc(s, l);
  t.prr = eval::prr(s, q);
  if (s.size() >= bins) t.rce = eval::rce(s, q, bins);
  return t;
}

}  // namespace report_detail

inline PanelReport evaluate_panel(const Panel& p, const EvalOptions& opt) {
  p.table.check_shape();
  const std::size_t n = p.table.cols();
  if (p.quality.size() != n) throw DataError("panel '" + p.name + "': quality does not match table columns");
  PanelReport rep;
  rep.name = p.name;
  const auto labels = eval::binarize_quality(p.quality, opt.threshold);
  const bool grouped = opt.group_by_query && !p.query_ids.empty();
  if (opt.group_by_query && p.query_ids.empty())
    warn("panel '" + p.name + "': no query ids; resampling instances");
  const eval::ResamplePlan plan(n, opt.replicates, opt.seed, grouped ? &p.query_ids : nullptr, opt.threads);

  std::vector<std::size_t> all(n);
  for (std::size_t i = 0; i < n; ++i) all[i] = i;
  for (std::size_t r = 0; r < p.table.rows(); ++r) {
    const auto& scores = p.table.values[r];
    EstimatorMetrics m;
    m.id = p.table.estimators[r];
    m.family = p.table.families[r];
    for (double v : scores) m.n_scored += std::isnan(v) ? 0 : 1;
    const auto point = report_detail::metrics_on(scores, p.quality, labels, all, opt.rce_bins);
    if (m.n_scored > 0 && m.n_scored < opt.rce_bins)
      warn("panel '" + p.name + "', estimator '" + m.id + "': fewer scored instances than RCE bins");
    std::vector<ScoreValue> a(plan.replicates()), b(plan.replicates()), c(plan.replicates());
    parallel_for(plan.replicates(), opt.threads, [&](std::size_t k) {
      const auto t = report_detail::metrics_on(scores, p.quality, labels, plan[k], opt.rce_bins);
      a[k] = t.auroc;
      b[k] = t.prr;
      c[k] = t.rce;
    });
    m.auroc = eval::summarize(point.auroc, a);
    m.prr = eval::summarize(point.prr, b);
    m.rce = eval::summarize(point.rce, c);
    rep.rows.push_back(std::move(m));
  }

  rep.spearman = eval::spearman_matrix(p.table.values);
  rep.spearman_clusters = eval::hcluster(rep.spearman);
  std::vector<std::string> fams;
  for (Family f : p.table.families) fams.emplace_back(to_string(f));
  rep.family_roc = eval::family_roc_aggregate(p.table.values, fams, labels);
  return rep;
}

inline MetricReport evaluate(const std::vector<Panel>& panels, const EvalOptions& opt) {
  MetricReport out;
  for (const auto& p : panels) {
    out.panels.push_back(evaluate_panel(p, opt));
    for (std::size_t r = 0; r < p.table.rows(); ++r)
      if (std::find(out.estimators.begin(), out.estimators.end(), p.table.estimators[r]) == out.estimators.end()) {
        out.estimators.push_back(p.table.estimators[r]);
        out.families.push_back(p.table.families[r]);
      }
  }
  const std::size_t m = out.estimators.size();
  const std::size_t np = out.panels.size();

  // Cross-panel index: position of estimator e in panel k, if present.
  std::vector<std::vector<std::optional<std::size_t>>> where(m, std::vector<std::optional<std::size_t>>(np));
  for (std::size_t k = 0; k < np; ++k)
    for (std::size_t r = 0; r < out.panels[k].rows.size(); ++r) {
      const auto it = std::find(out.estimators.begin(), out.estimators.end(), out.panels[k].rows[r].id);
      where[static_cast<std::size_t>(it - out.estimators.begin())][k] = r;
    }

  // Mean Spearman matrix over panels where the cell is defined.
  out.spearman_mean = Eigen::MatrixXd::Constant(m, m, eval::kNaN);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < m; ++j) {
      double sum = 0.0;
      std::size_t cnt = 0;
      for (std::size_t k = 0; k < np; ++k) {
        if (!where[i][k] || !where[j][k]) continue;
        const double v = out.panels[k].spearman(static_cast<Eigen::Index>(*where[i][k]),
                                                static_cast<Eigen::Index>(*where[j][k]));
        if (std::isnan(v)) continue;
        sum += v;
        ++cnt;
      }
      if (cnt) out.spearman_mean(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = sum / static_cast<double>(cnt);
    }
  out.spearman_clusters = eval::hcluster(out.spearman_mean);

  // Performance profiles across panels.
  auto profiles = [&](auto pick) {
    std::vector<std::vector<double>> prof(m, std::vector<double>(np, eval::kNaN));
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t k = 0; k < np; ++k)
        if (where[i][k]) {
          const ScoreValue v = pick(out.panels[k].rows[*where[i][k]]);
          if (v) prof[i][k] = v.value();
        }
    return prof;
  };
  const auto auroc_prof = profiles([](const EstimatorMetrics& e) { return e.auroc.point; });
  out.kendall["auroc"] = eval::kendall_profiles(auroc_prof);
  out.kendall["prr"] = eval::kendall_profiles(profiles([](const EstimatorMetrics& e) { return e.prr.point; }));
  out.kendall["rce"] = eval::kendall_profiles(profiles([](const EstimatorMetrics& e) { return e.rce.point; }));
  if (np >= 2) {
    out.kendall_clusters = eval::hcluster(out.kendall["auroc"]);
  }

  std::vector<std::map<std::string, eval::MeanCurve>> rocs;
  for (const auto& pr : out.panels) rocs.push_back(pr.family_roc);
  out.family_roc = eval::aggregate_panels(rocs);

  // Rank of each estimator's AUROC within each panel (1 = best, ties
  // averaged); panels where the AUROC is undefined are excluded.
  std::vector<std::vector<double>> ranks(m);
  for (std::size_t k = 0; k < np; ++k) {
    std::vector<std::size_t> who;
    std::vector<double> neg;
    for (std::size_t i = 0; i < m; ++i)
      if (!std::isnan(auroc_prof[i][k])) {
        who.push_back(i);
        neg.push_back(-auroc_prof[i][k]);
      }
    const auto r = eval::average_ranks(neg);
    for (std::size_t j = 0; j < who.size(); ++j) ranks[who[j]].push_back(r[j]);
  }
  for (std::size_t i = 0; i < m; ++i) {
    RankVariability rv;
    rv.id = out.estimators[i];
    rv.panels_used = ranks[i].size();
    rv.panels_missing = np - ranks[i].size();
    if (!ranks[i].empty()) {
      double s = 0.0;
      for (double x : ranks[i]) s += x;
      rv.mean_rank = s / static_cast<double>(ranks[i].size());
      double ss = 0.0;
      for (double x : ranks[i]) ss += (x - rv.mean_rank) * (x - rv.mean_rank);
      rv.rank_std = std::sqrt(ss / static_cast<double>(ranks[i].size()));
    }
    out.rank_variability.push_back(rv);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Emitters

namespace report_detail {

inline std::string value_or_na(const ScoreValue& v) { return v ? format_double(v.value()) : "NA"; }

inline std::string std_or_na(const eval::BootstrapResult& b) {
  return b.point && b.valid >= 2 ? format_double(b.stddev) : "NA";
}

inline std::string display_name(const std::string& id) {
  for (const auto& e : catalog())
    if (e.id == id) return std::string(e.name);
  return id;
}

inline nlohmann::ordered_json matrix_json(const Eigen::MatrixXd& m) {
  auto rows = nlohmann::ordered_json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    auto row = nlohmann::ordered_json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      if (std::isnan(m(i, j)))
        row.push_back(nullptr);
      else
        row.push_back(m(i, j));
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

inline nlohmann::ordered_json merges_json(const std::vector<eval::Merge>& merges) {
  auto out = nlohmann::ordered_json::array();
  for (const auto& mg : merges) out.push_back({mg.left, mg.right, mg.distance, mg.size});
  return out;
}

inline nlohmann::ordered_json curves_json(const std::map<std::string, eval::MeanCurve>& curves) {
  auto out = nlohmann::ordered_json::object();
  for (const auto& [family, c] : curves)
    out[family] = {{"members", c.members}, {"mean_tpr", c.mean_tpr}, {"std_tpr", c.std_tpr}};
  return out;
}

}  // namespace report_detail

inline std::string metrics_csv(const MetricReport& r) {
  using namespace report_detail;
  std::ostringstream os;
  os << "panel,estimator,family,name,n_scored,auroc,auroc_std,prr,prr_std,rce,rce_std,"
        "auroc_discarded,prr_discarded,rce_discarded\n";
  for (const auto& p : r.panels)
    for (const auto& e : p.rows)
      os << p.name << ',' << e.id << ',' << to_string(e.family) << ',' << display_name(e.id) << ','
         << e.n_scored << ',' << value_or_na(e.auroc.point) << ',' << std_or_na(e.auroc) << ','
         << value_or_na(e.prr.point) << ',' << std_or_na(e.prr) << ',' << value_or_na(e.rce.point) << ','
         << std_or_na(e.rce) << ',' << e.auroc.discarded << ',' << e.prr.discarded << ',' << e.rce.discarded
         << '\n';
  return os.str();
}

inline std::string redundancy_json(const MetricReport& r) {
  using namespace report_detail;
  nlohmann::ordered_json j;
  j["estimators"] = r.estimators;
  auto panels = nlohmann::ordered_json::object();
  for (const auto& p : r.panels) {
    std::vector<std::string> ids;
    for (const auto& e : p.rows) ids.push_back(e.id);
    panels[p.name] = {{"estimators", ids},
                      {"spearman", matrix_json(p.spearman)},
                      {"spearman_clusters", merges_json(p.spearman_clusters)}};
  }
  j["panels"] = std::move(panels);
  j["spearman_mean"] = matrix_json(r.spearman_mean);
  j["spearman_clusters"] = merges_json(r.spearman_clusters);
  auto kendall = nlohmann::ordered_json::object();
  for (const auto& [metric, m] : r.kendall) kendall[metric] = matrix_json(m);
  j["kendall"] = std::move(kendall);
  j["kendall_clusters"] = merges_json(r.kendall_clusters);
  if (r.panels.size() < 2) j["note"] = "Kendall profiles need at least 2 panels; off-diagonal cells are null";
  return j.dump(1) + "\n";
}

inline std::string family_roc_json(const MetricReport& r) {
  using namespace report_detail;
  nlohmann::ordered_json j;
  j["fpr"] = eval::roc_grid();
  auto panels = nlohmann::ordered_json::object();
  for (const auto& p : r.panels) panels[p.name] = curves_json(p.family_roc);
  j["panels"] = std::move(panels);
  j["aggregate"] = curves_json(r.family_roc);
  return j.dump(1) + "\n";
}

inline std::string rank_variability_csv(const MetricReport& r) {
  std::ostringstream os;
  os << "estimator,family,panels_used,panels_missing,mean_rank,rank_std\n";
  for (std::size_t i = 0; i < r.rank_variability.size(); ++i) {
    const auto& v = r.rank_variability[i];
    os << v.id << ',' << to_string(r.families[i]) << ',' << v.panels_used << ',' << v.panels_missing << ','
       << format_value(v.mean_rank) << ',' << format_value(v.rank_std) << '\n';
  }
  return os.str();
}

}  // namespace uqbench

#endif  // UQBENCH_REPORT_HPP_
