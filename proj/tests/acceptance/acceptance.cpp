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


// Acceptance checks. Prints one PASS/FAIL line per criterion and exits
// non-zero if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <random>
#include <string>
#include <thread>
#include <vector>

#include "../oracles.hpp"
#include "../test_helpers.hpp"
#include "uqbench/pipeline.hpp"

namespace {

using namespace uqbench;
using Clock = std::chrono::steady_clock;

const std::string kData = UQBENCH_TEST_DATA;

struct Outcome {
  bool pass = true;
  std::string detail;
};

int failures = 0;

void criterion(int id, const char* name, const std::function<Outcome()>& body) {
  const auto t0 = Clock::now();
  Outcome o;
  try {
    o = body();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  const double secs = std::chrono::duration<double>(Clock::now() - t0).count();
  std::printf("%s [%d] %s: %s (%.2f s)\n", o.pass ? "PASS" : "FAIL", id, name, o.detail.c_str(), secs);
  std::fflush(stdout);
  if (!o.pass) ++failures;
}

std::string fmt(const char* f, double a) {
  char buf[128];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

double elapsed(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

// [1] Metric kernels against brute force on small random instances.
Outcome metric_oracles() {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(20260101);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  double worst = 0.0;
  int compared = 0;
  bool defined_agree = true;
  auto check = [&](std::optional<double> want, ScoreValue got) {
    if (want.has_value() != got.has_value()) {
      defined_agree = false;
      return;
    }
    if (!want) return;
    worst = std::max(worst, std::abs(*want - got.value()));
    ++compared;
  };
  for (int inst = 0; inst < 200; ++inst) {
    const std::size_t n = 2 + rng() % 11;  // 2..12
    std::vector<double> s(n), s2(n), q(n);
    std::vector<int> y(n);
    const bool ties = inst % 2 == 0;
    for (std::size_t i = 0; i < n; ++i) {
      s[i] = ties ? static_cast<double>(rng() % 4) : unit(rng);
      s2[i] = ties ? static_cast<double>(rng() % 4) : unit(rng);
      q[i] = inst % 3 == 0 ? unit(rng) : static_cast<double>(rng() % 2);
      y[i] = static_cast<int>(rng() % 2);
    }
    check(oracle::auroc(s, y), eval::auroc(s, y));
    check(oracle::prr(s, q), eval::prr(s, q));
    check(oracle::spearman(s, s2), eval::spearman(s, s2));
    check(oracle::kendall(s, s2), eval::kendall_tau_b(s, s2));
  }
  const double secs = elapsed(t0);
  const bool pass = defined_agree && worst <= 1e-12 && secs < 5.0;
  return {pass, std::to_string(compared) + " values, max |diff| = " + fmt("%.3g", worst) +
                    (defined_agree ? "" : ", definedness mismatch") + ", " + fmt("%.3f", secs) + " s < 5 s"};
}

// Synthetic score table over every estimator, with quality labels.
struct SynthPanel {
  ScoreTable table;
  std::vector<double> quality;
};

SynthPanel synthetic_panel() {
  SynthParams p;
  p.n = 160;
  p.seed = 11;
  p.signal = 0.6;
  p.hallucination_rate = 0.4;
  p.train_fraction = 0.25;
  TraceCorpus corpus;
  corpus.traces = synth_traces(p);
  SynthParams bp = p;
  bp.seed = 12;
  bp.n = 40;
  bp.train_fraction = 0.0;
  const auto background = synth_traces(bp);
  RunConfig cfg = resolve_config({});
  const auto run = score_corpus(corpus, {}, background, cfg);
  SynthPanel out{run.table, {}};
  for (const auto& t : corpus.traces)
    if (t.split == Split::kEval) out.quality.push_back(t.quality.value);
  return out;
}

// [2] exp and positive affine maps leave rank-based metrics unchanged.
Outcome monotone_invariance() {
  const auto panel = synthetic_panel();
  const auto& t = panel.table;
  double worst = 0.0;
  std::size_t columns = 0;
  auto transformed = [&](const std::function<double(double)>& f) {
    auto v = t.values;
    for (auto& row : v)
      for (auto& x : row)
        if (!std::isnan(x)) x = f(x);
    return v;
  };
  const auto labels = eval::binarize_quality(panel.quality);
  auto metrics = [&](const std::vector<double>& row) {
    std::vector<double> s, q;
    std::vector<int> y;
    for (std::size_t i = 0; i < row.size(); ++i)
      if (!std::isnan(row[i])) {
        s.push_back(row[i]);
        q.push_back(panel.quality[i]);
        y.push_back(labels[i]);
      }
    return std::array<ScoreValue, 3>{eval::auroc(s, y), eval::prr(s, q),
                                     s.size() >= 20 ? eval::rce(s, q, 20) : ScoreValue::missing()};
  };
  bool defined_agree = true;
  const auto base_rho = eval::spearman_matrix(t.values);
  for (const auto& f : std::vector<std::function<double(double)>>{
           [](double x) { return std::exp(x); }, [](double x) { return 3.0 * x + 7.0; },
           [](double x) { return 0.5 * x - 2.0; }}) {
    const auto v = transformed(f);
    for (std::size_t r = 0; r < v.size(); ++r) {
      const auto a = metrics(t.values[r]);
      const auto b = metrics(v[r]);
      for (int k = 0; k < 3; ++k) {
        if (a[k].has_value() != b[k].has_value()) defined_agree = false;
        if (a[k] && b[k]) worst = std::max(worst, std::abs(a[k].value() - b[k].value()));
      }
      ++columns;
    }
    const auto rho = eval::spearman_matrix(v);
    for (Eigen::Index i = 0; i < rho.rows(); ++i)
      for (Eigen::Index j = 0; j < rho.cols(); ++j) {
        if (std::isnan(rho(i, j)) != std::isnan(base_rho(i, j))) defined_agree = false;
        if (!std::isnan(rho(i, j)) && !std::isnan(base_rho(i, j)))
          worst = std::max(worst, std::abs(rho(i, j) - base_rho(i, j)));
      }
  }
  return {defined_agree && worst < 1e-12,
          std::to_string(columns) + " column transforms over " + std::to_string(t.rows()) +
              " estimators, max |diff| = " + fmt("%.3g", worst)};
}

// [3] Closed-form identities between estimators, exact.
Outcome identities() {
  SynthParams p;
  p.n = 1000;
  p.seed = 31;
  p.signal = 0.5;
  p.hallucination_rate = 0.5;
  auto traces = synth_traces(p);
  EstimatorConfig cfg;
  cfg.cpmi_lambda = 0.0;
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> unit(0.01, 0.99);
  int bad = 0;
  const char* first = nullptr;
  auto expect = [&](bool ok, const char* what) {
    if (!ok && !bad++) first = what;
  };
  for (auto& t : traces) {
    const double msp = score_one(t, Est::kMsp, cfg, nullptr).value();
    const double ppl = score_one(t, Est::kPpl, cfg, nullptr).value();
    expect(ppl == msp / static_cast<double>(t.response.size()), "ppl = msp/T");
    expect(score_one(t, Est::kCpmi, cfg, nullptr).value() == ppl, "cpmi(lambda=0) = ppl");
    const double sim = unit(rng), sal = unit(rng);
    for (auto& s : t.response) {
      s.loo_similarity = sim;
      s.attn_from_last = sal;
      s.logprob_uncond = s.logprob_cond;
    }
    expect(score_one(t, Est::kTokenSar, cfg, nullptr).value() == ppl, "token_sar uniform = ppl");
    expect(score_one(t, Est::kCsl, cfg, nullptr).value() == ppl, "csl uniform = ppl");
    expect(score_one(t, Est::kPmi, cfg, nullptr).value() == 0.0, "pmi matched = 0");
    t.relations->sent_sim->setOnes();
    for (Est e : {Est::kCocoaMsp, Est::kCocoaPpl, Est::kCocoaMte})
      expect(score_one(t, e, cfg, nullptr).value() == 0.0, "cocoa all-ones = 0");
  }
  return {bad == 0, bad == 0 ? "7 identities x 1000 traces exact"
                             : std::to_string(bad) + " violations, first: " + first};
}

// [4] Spectral estimators against counting and closed-form oracles.
Outcome spectral() {
  std::mt19937_64 rng(77);
  double worst = 0.0;
  int exact_bad = 0;
  for (int trial = 0; trial < 500; ++trial) {
    const int S = 1 + static_cast<int>(rng() % 8);
    std::vector<int> block(static_cast<std::size_t>(S));
    const int m = 1 + static_cast<int>(rng() % static_cast<unsigned>(S));
    for (auto& b : block) b = static_cast<int>(rng() % static_cast<unsigned>(m));
    Eigen::MatrixXd w(S, S);
    for (int i = 0; i < S; ++i)
      for (int j = 0; j < S; ++j) w(i, j) = block[static_cast<std::size_t>(i)] == block[static_cast<std::size_t>(j)];
    const auto g = blackbox::make_graph(w, blackbox::GraphMode::kNliEntail);
    const double comps = oracle::components(w);
    worst = std::max(worst, std::abs(blackbox::eig_val_laplacian(g).value() - comps));

    // DegMat: fraction of missing unit edges, by counting.
    int ones = 0;
    for (int i = 0; i < S; ++i)
      for (int j = 0; j < S; ++j) ones += w(i, j) == 1.0;
    if (blackbox::degmat(g).value() != static_cast<double>(S * S - ones) / (S * S)) ++exact_bad;

    // NumSet / LabelProb from the block labels.
    BoolMatrix bid(S, S);
    for (int i = 0; i < S; ++i)
      for (int j = 0; j < S; ++j) bid(i, j) = w(i, j) == 1.0;
    const auto part = sample::cluster_semantic(bid);
    std::vector<int> sizes(static_cast<std::size_t>(m), 0);
    for (int b : block) ++sizes[static_cast<std::size_t>(b)];
    const int used = static_cast<int>(std::count_if(sizes.begin(), sizes.end(), [](int x) { return x > 0; }));
    const int largest = *std::max_element(sizes.begin(), sizes.end());
    if (blackbox::num_set(part).value() != used) ++exact_bad;
    if (blackbox::label_prob(part).value() != 1.0 - static_cast<double>(largest) / S) ++exact_bad;
  }
  const double kle = blackbox::kle(blackbox::make_graph(Eigen::MatrixXd::Ones(3, 3), blackbox::GraphMode::kNliEntail),
                                   0.3).value();
  const bool pass = worst <= 1e-9 && exact_bad == 0 && std::abs(kle - 0.9986) <= 1e-3;
  return {pass, "eig_val_laplacian max |diff| = " + fmt("%.3g", worst) + " over 500 graphs, KLE(J3) = " +
                    fmt("%.6f", kle) + ", counting mismatches = " + std::to_string(exact_bad)};
}

// [5] Density estimators.
Outcome density_checks() {
  std::mt19937_64 rng(8);
  double affine = 0.0, rde_gap = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    const Eigen::MatrixXd pts = testing::random_matrix(rng, 40, 5);
    const Eigen::MatrixXd a = testing::random_matrix(rng, 5, 5) + 4.0 * Eigen::MatrixXd::Identity(5, 5);
    const Eigen::VectorXd b = testing::random_matrix(rng, 5, 1);
    const Eigen::MatrixXd moved = (pts * a.transpose()).rowwise() + b.transpose();
    const auto m1 = density::fit_gaussian(pts, 0.0);
    const auto m2 = density::fit_gaussian(moved, 0.0);
    density::RdeConfig rc;
    rc.components = 5;
    rc.kernel.type = density::KernelType::kLinear;
    rc.mcd.support_fraction = 1.0;
    rc.ridge = 0.0;
    const auto rde = density::rde_fit(pts, rc);
    for (int k = 0; k < 10; ++k) {
      const Eigen::VectorXd x = testing::random_matrix(rng, 5, 1);
      affine = std::max(affine, std::abs(m1.distance(x) - m2.distance(a * x + b)));
      rde_gap = std::max(rde_gap, std::abs(density::rde_score(x, rde) - m1.distance(x)));
    }
  }
  int huq_bad = 0;
  std::uniform_int_distribution<int> grid(-8, 8);
  for (int trial = 0; trial < 1000; ++trial) {
    std::vector<double> ta(10), tb(10);
    for (auto& v : ta) v = grid(rng) / 4.0;
    for (auto& v : tb) v = grid(rng) / 4.0;
    const double x = grid(rng) / 4.0, y = grid(rng) / 4.0;
    int ca = 0, cb = 0;
    for (double v : ta) ca += v <= x;
    for (double v : tb) cb += v <= y;
    const double h = density::huq(x, y, density::EcdfTable(ta), density::EcdfTable(tb)).value();
    if (h != (ca + cb) / 20.0 || h < 0.0 || h > 1.0) ++huq_bad;
  }
  const bool pass = affine <= 1e-8 && rde_gap <= 1e-8 && huq_bad == 0;
  return {pass, "mahalanobis affine max |diff| = " + fmt("%.3g", affine) + ", rde vs mahalanobis = " +
                    fmt("%.3g", rde_gap) + ", huq counting mismatches = " + std::to_string(huq_bad)};
}

// [6] Full pipeline on the golden fixture is reproducible and thread-invariant.
Outcome pipeline_determinism() {
  const auto t0 = Clock::now();
  const auto root = std::filesystem::temp_directory_path() / "uqbench_acceptance";
  std::filesystem::remove_all(root);
  auto run = [&](const std::string& name, unsigned threads) {
    auto cfg = resolve_config(load_config(kData + "/golden.cfg"));
    cfg.traces = kData + "/golden.jsonl.gz";
    cfg.background_traces = kData + "/background.jsonl.gz";
    cfg.out = (root / name).string();
    cfg.threads = threads;
    const auto rep = cmd_report(cfg);
    return rep.estimators.size();
  };
  const unsigned many = std::max(4u, std::thread::hardware_concurrency());
  const auto n_est = run("one_thread", 1);
  run("many_a", many);
  run("many_b", many);
  const double secs = elapsed(t0);
  int diffs = 0, golden_diffs = 0;
  for (const char* f : {"scores.csv", "models.json", "metrics.csv", "redundancy.json", "family_roc.json",
                        "rank_variability.csv"}) {
    const auto a = read_file((root / "one_thread" / f).string());
    diffs += a != read_file((root / "many_a" / f).string());
    diffs += a != read_file((root / "many_b" / f).string());
    golden_diffs += a != read_file(kData + "/golden/" + f);
  }
  const bool pass = n_est == 46 && diffs == 0 && golden_diffs == 0 && secs < 30.0;
  return {pass, std::to_string(n_est) + " estimators, 3 runs (1 and " + std::to_string(many) +
                    " threads), differing files = " + std::to_string(diffs) + ", vs committed golden = " +
                    std::to_string(golden_diffs) + ", " + fmt("%.2f", secs) + " s < 30 s"};
}

// [7] Planted signal is recovered; no signal gives chance AUROC.
Outcome signal_recovery() {
  auto planted = [](double signal, std::uint64_t seed) {
    SynthParams p;
    p.n = 300;
    p.signal = signal;
    p.seed = seed;
    std::vector<double> s, q;
    for (const auto& t : synth_traces(p)) {
      s.push_back(score_one(t, Est::kMsp, EstimatorConfig{}, nullptr).value());
      q.push_back(t.quality.value);
    }
    return std::pair{s, q};
  };
  const auto [s1, q1] = planted(1.0, 42);
  const auto y1 = eval::binarize_quality(q1);
  const double auc1 = eval::auroc(s1, y1).value();
  const double prr1 = eval::prr(s1, q1).value();
  const auto [s0, q0] = planted(0.0, 42);
  const auto y0 = eval::binarize_quality(q0);
  const auto b = eval::bootstrap(s0.size(), [&](const std::vector<std::size_t>& idx) {
    std::vector<double> s;
    std::vector<int> y;
    for (auto i : idx) {
      s.push_back(s0[i]);
      y.push_back(y0[i]);
    }
    return eval::auroc(s, y);
  }, 1000, 42, 0);
  const double auc0 = b.point.value();
  const bool pass = auc1 == 1.0 && prr1 == 1.0 && std::abs(auc0 - 0.5) <= 3.0 * b.stddev;
  return {pass, "signal 1: AUROC = " + fmt("%.17g", auc1) + ", PRR = " + fmt("%.17g", prr1) +
                    "; signal 0: AUROC = " + fmt("%.4f", auc0) + " (0.5 +/- " + fmt("%.4f", 3.0 * b.stddev) + ")"};
}

// [8] Bootstrap std against a high-replicate reference.
Outcome bootstrap_calibration() {
  const auto f = oracle::auroc_fixture();
  const auto b = eval::bootstrap(f.scores.size(), [&](const std::vector<std::size_t>& idx) {
    std::vector<double> s;
    std::vector<int> y;
    for (auto i : idx) {
      s.push_back(f.scores[i]);
      y.push_back(f.labels[i]);
    }
    return eval::auroc(s, y);
  }, 1000, 42, 0);
  const double ref = oracle::bootstrap_auroc_std(f.scores, f.labels, 100000, 2026);
  const double ratio = b.stddev / ref;
  return {std::abs(ratio - 1.0) <= 0.10, "std(1000) = " + fmt("%.5f", b.stddev) + ", std(100000) = " +
                                             fmt("%.5f", ref) + ", ratio = " + fmt("%.4f", ratio) + " (within 1 +/- 0.10)"};
}

}  // namespace

int main() {
  criterion(1, "metric oracle equivalence", metric_oracles);
  criterion(2, "monotone-transform invariance", monotone_invariance);
  criterion(3, "estimator identities", identities);
  criterion(4, "spectral correctness", spectral);
  criterion(5, "density correctness", density_checks);
  criterion(6, "pipeline determinism", pipeline_determinism);
  criterion(7, "synthetic signal recovery", signal_recovery);
  criterion(8, "bootstrap calibration", bootstrap_calibration);
  std::printf("%d of 8 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
