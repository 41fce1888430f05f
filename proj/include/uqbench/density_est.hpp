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

#ifndef UQBENCH_DENSITY_EST_HPP_
#define UQBENCH_DENSITY_EST_HPP_

// Training-based density estimators: Gaussian (Mahalanobis) fits, the
// Kernel-PCA + MCD robust variant, and empirical-CDF rank fusion.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "uqbench/common.hpp"

namespace uqbench::density {

using Eigen::MatrixXd;
using Eigen::VectorXd;

/// Default ridge: 1e-6 times the mean variance (1e-6 if all variances vanish).
inline double default_ridge(const MatrixXd& cov) {
  const double mean_var = cov.trace() / static_cast<double>(cov.rows());
  return 1e-6 * (mean_var > 0.0 ? mean_var : 1.0);
}

/// Mean and covariance with a diagonal ridge; Cholesky factor cached.
class GaussianModel {
 public:
  GaussianModel() = default;
  GaussianModel(VectorXd mean, MatrixXd covariance, double ridge)
      : mean_(std::move(mean)), covariance_(std::move(covariance)), ridge_(ridge) {
    if (covariance_.rows() != mean_.size() || covariance_.cols() != mean_.size())
      throw DataError("GaussianModel: covariance shape does not match mean");
    if ((covariance_ - covariance_.transpose()).cwiseAbs().maxCoeff() > 1e-10 *
            std::max(1.0, covariance_.cwiseAbs().maxCoeff()))
      throw DataError("GaussianModel: covariance is not symmetric");
    MatrixXd reg = covariance_;
    reg.diagonal().array() += ridge_;
    chol_.compute(reg);
    if (chol_.info() != Eigen::Success)
      throw DataError("GaussianModel: covariance is not positive definite after ridge");
  }

  const VectorXd& mean() const { return mean_; }
  const MatrixXd& covariance() const { return covariance_; }
  double ridge() const { return ridge_; }
  Eigen::Index dim() const { return mean_.size(); }

  double distance(const VectorXd& x) const {
    if (x.size() != mean_.size())
      throw DataError("mahalanobis: dimension mismatch (" + std::to_string(x.size()) + " vs " +
                      std::to_string(mean_.size()) + ")");
    const VectorXd z = chol_.matrixL().solve(x - mean_);
    return z.norm();
  }

 private:
  VectorXd mean_;
  MatrixXd covariance_;
  double ridge_ = 0.0;
  Eigen::LLT<MatrixXd> chol_;
};

inline MatrixXd sample_covariance(const MatrixXd& points, const VectorXd& mean) {
  const MatrixXd centered = points.rowwise() - mean.transpose();
  return centered.transpose() * centered / static_cast<double>(points.rows() - 1);
}

/// Fits a Gaussian to the rows of `points`. `ridge` defaults to
/// default_ridge(covariance).
inline GaussianModel fit_gaussian(const MatrixXd& points, std::optional<double> ridge = {}) {
  if (points.rows() < 2) throw DataError("fit_gaussian: at least 2 training vectors required");
  if (!points.allFinite()) throw DataError("fit_gaussian: non-finite training vectors");
  VectorXd mean = points.colwise().mean().transpose();
  MatrixXd cov = sample_covariance(points, mean);
  const double r = ridge.value_or(default_ridge(cov));
  return GaussianModel(std::move(mean), std::move(cov), r);
}

inline double mahalanobis(const VectorXd& x, const GaussianModel& model) {
  return model.distance(x);
}

inline double relative_md(const VectorXd& x, const GaussianModel& task,
                          const GaussianModel& background) {
  if (task.dim() != background.dim())
    throw DataError("relative_md: task and background dimensions differ");
  return task.distance(x) - background.distance(x);
}

// ---------------------------------------------------------------------------
// Kernel PCA

enum class KernelType { kRbf, kLinear };

struct KernelConfig {
  KernelType type = KernelType::kRbf;
  // RBF bandwidth; 0 selects the median pairwise distance.
  double bandwidth = 0.0;
};

class KernelPca {
 public:
  KernelPca() = default;

  /// Fits on the rows of `points`. `components` = 0 selects min(100, n - 1).
  KernelPca(const MatrixXd& points, int components, KernelConfig kernel)
      : kernel_(kernel), landmarks_(points) {
    const auto n = points.rows();
    if (n < 2) throw DataError("kernel PCA: at least 2 training vectors required");
    if (kernel_.type == KernelType::kRbf && kernel_.bandwidth <= 0.0)
      kernel_.bandwidth = median_distance(points);
    MatrixXd k(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = i; j < n; ++j) k(i, j) = k(j, i) = eval(points.row(i), points.row(j));
    col_mean_ = k.colwise().mean().transpose();
    all_mean_ = col_mean_.mean();
    MatrixXd kc = k;
    kc.rowwise() -= col_mean_.transpose();
    kc.colwise() -= col_mean_;
    kc.array() += all_mean_;
    Eigen::SelfAdjointEigenSolver<MatrixXd> solver(kc);
    const VectorXd& vals = solver.eigenvalues();
    const double top = vals(n - 1);
    int wanted = components > 0 ? components : static_cast<int>(std::min<Eigen::Index>(100, n - 1));
    wanted = static_cast<int>(std::min<Eigen::Index>(wanted, n - 1));
    std::vector<Eigen::Index> keep;
    for (Eigen::Index idx = n - 1; idx >= 0 && static_cast<int>(keep.size()) < wanted; --idx)
      if (vals(idx) > 1e-10 * std::max(top, 1e-300)) keep.push_back(idx);
    if (keep.empty()) throw DataError("kernel PCA: kernel matrix has no positive spectrum");
    alphas_.resize(n, static_cast<Eigen::Index>(keep.size()));
    for (std::size_t c = 0; c < keep.size(); ++c) {
      VectorXd v = solver.eigenvectors().col(keep[c]);
      // Fix the sign so the largest-magnitude loading is positive.
      Eigen::Index arg = 0;
      v.cwiseAbs().maxCoeff(&arg);
      if (v(arg) < 0) v = -v;
      alphas_.col(static_cast<Eigen::Index>(c)) = v / std::sqrt(vals(keep[c]));
    }
  }

  Eigen::Index components() const { return alphas_.cols(); }
  const KernelConfig& kernel() const { return kernel_; }

  VectorXd project(const VectorXd& x) const {
    if (x.size() != landmarks_.cols()) throw DataError("kernel PCA: dimension mismatch");
    const auto n = landmarks_.rows();
    VectorXd kx(n);
    for (Eigen::Index i = 0; i < n; ++i) kx(i) = eval(landmarks_.row(i), x.transpose());
    const double kx_mean = kx.mean();
    kx.array() -= col_mean_.array() + kx_mean - all_mean_;
    return alphas_.transpose() * kx;
  }

  MatrixXd project_rows(const MatrixXd& points) const {
    MatrixXd out(points.rows(), components());
    for (Eigen::Index i = 0; i < points.rows(); ++i)
      out.row(i) = project(points.row(i).transpose()).transpose();
    return out;
  }

  nlohmann::ordered_json to_json() const;
  static KernelPca from_json(const nlohmann::ordered_json& j);

 private:
  template <typename A, typename B>
  double eval(const A& a, const B& b) const {
    if (kernel_.type == KernelType::kLinear) return a.dot(b);
    const double d2 = (a - b).squaredNorm();
    return std::exp(-d2 / (2.0 * kernel_.bandwidth * kernel_.bandwidth));
  }

  static double median_distance(const MatrixXd& points) {
    std::vector<double> d;
    for (Eigen::Index i = 0; i < points.rows(); ++i)
      for (Eigen::Index j = i + 1; j < points.rows(); ++j)
        d.push_back((points.row(i) - points.row(j)).norm());
    auto mid = d.begin() + static_cast<std::ptrdiff_t>(d.size() / 2);
    std::nth_element(d.begin(), mid, d.end());
    return *mid > 0.0 ? *mid : 1.0;
  }

  KernelConfig kernel_;
  MatrixXd landmarks_;
  MatrixXd alphas_;
  VectorXd col_mean_;
  double all_mean_ = 0.0;
};

// ---------------------------------------------------------------------------
// Minimum Covariance Determinant

struct McdConfig {
  // Support size as a fraction of n; 0 selects h = ceil((n + p + 1) / 2).
  double support_fraction = 0.0;
  int restarts = 50;
  std::uint64_t seed = 42;
  int max_csteps = 100;
  // Subsets are enumerated exhaustively up to this many points.
  int exact_max_n = 12;
};

struct McdResult {
  VectorXd mean;
  MatrixXd covariance;
  std::vector<int> support;  // ascending row indices
  bool converged = true;
};

inline int mcd_support_size(Eigen::Index n, Eigen::Index p, double fraction) {
  Eigen::Index h = fraction > 0.0 ? static_cast<Eigen::Index>(std::ceil(fraction * static_cast<double>(n) - 1e-12))
                                  : (n + p + 2) / 2;
  h = std::clamp<Eigen::Index>(h, std::min(n, p + 1), n);
  return static_cast<int>(h);
}

namespace mcd_detail {

struct SubsetFit {
  VectorXd mean;
  MatrixXd cov;
  double log_det = std::numeric_limits<double>::infinity();
  bool ok = false;
};

inline SubsetFit fit_subset(const MatrixXd& z, const std::vector<int>& idx) {
  SubsetFit f;
  const auto p = z.cols();
  MatrixXd sub(static_cast<Eigen::Index>(idx.size()), p);
  for (std::size_t i = 0; i < idx.size(); ++i) sub.row(static_cast<Eigen::Index>(i)) = z.row(idx[i]);
  f.mean = sub.colwise().mean().transpose();
  if (sub.rows() < 2) return f;
  f.cov = sample_covariance(sub, f.mean);
  Eigen::LLT<MatrixXd> llt(f.cov);
  if (llt.info() != Eigen::Success) return f;
  const VectorXd diag = llt.matrixL().toDenseMatrix().diagonal();
  // Relative guard against numerically singular fits.
  const double scale = std::max(1e-300, f.cov.diagonal().maxCoeff());
  if (diag.minCoeff() * diag.minCoeff() <= 1e-12 * scale) return f;
  f.log_det = 2.0 * diag.array().log().sum();
  f.ok = true;
  return f;
}

inline std::vector<int> closest(const MatrixXd& z, const SubsetFit& fit, int h) {
  Eigen::LLT<MatrixXd> llt(fit.cov);
  std::vector<std::pair<double, int>> d;
  for (Eigen::Index i = 0; i < z.rows(); ++i) {
    const VectorXd r = llt.matrixL().solve((z.row(i).transpose() - fit.mean).eval());
    d.emplace_back(r.squaredNorm(), static_cast<int>(i));
  }
  std::stable_sort(d.begin(), d.end());
  std::vector<int> idx;
  for (int i = 0; i < h; ++i) idx.push_back(d[static_cast<std::size_t>(i)].second);
  std::sort(idx.begin(), idx.end());
  return idx;
}

}  // namespace mcd_detail

/// Raw MCD estimate (no consistency correction or reweighting): the mean
/// and sample covariance of the h-subset with the smallest covariance
/// determinant. Exhaustive for small n, FAST-MCD with seeded restarts
/// otherwise. Falls back to the full sample when every subset is singular.
inline McdResult fit_mcd(const MatrixXd& z, const McdConfig& cfg = {}) {
  using mcd_detail::SubsetFit;
  const auto n = z.rows();
  const auto p = z.cols();
  if (n < 2) throw DataError("MCD: at least 2 points required");
  const int h = mcd_support_size(n, p, cfg.support_fraction);

  SubsetFit best;
  std::vector<int> best_idx;
  auto consider = [&](SubsetFit f, std::vector<int> idx) {
    if (f.ok && f.log_det < best.log_det - 1e-12) {
      best = std::move(f);
      best_idx = std::move(idx);
    }
  };

  if (h == n) {
    std::vector<int> all(static_cast<std::size_t>(n));
    std::iota(all.begin(), all.end(), 0);
    consider(mcd_detail::fit_subset(z, all), all);
  } else if (n <= cfg.exact_max_n) {
    std::vector<bool> mask(static_cast<std::size_t>(n), false);
    std::fill(mask.begin(), mask.begin() + h, true);
    do {
      std::vector<int> idx;
      for (Eigen::Index i = 0; i < n; ++i)
        if (mask[static_cast<std::size_t>(i)]) idx.push_back(static_cast<int>(i));
      consider(mcd_detail::fit_subset(z, idx), idx);
    } while (std::prev_permutation(mask.begin(), mask.end()));
  } else {
    for (int r = 0; r < cfg.restarts; ++r) {
      std::seed_seq seq{static_cast<std::uint32_t>(cfg.seed), static_cast<std::uint32_t>(cfg.seed >> 32),
                        static_cast<std::uint32_t>(r)};
      std::mt19937_64 rng(seq);
      std::vector<int> perm(static_cast<std::size_t>(n));
      std::iota(perm.begin(), perm.end(), 0);
      portable_shuffle(perm.begin(), perm.end(), rng);
      // Start from p + 1 points, growing until the fit is nonsingular.
      std::size_t take = static_cast<std::size_t>(std::min<Eigen::Index>(p + 1, n));
      SubsetFit fit;
      std::vector<int> idx;
      while (true) {
        idx.assign(perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(take));
        std::sort(idx.begin(), idx.end());
        fit = mcd_detail::fit_subset(z, idx);
        if (fit.ok || take >= static_cast<std::size_t>(h)) break;
        ++take;
      }
      if (!fit.ok) continue;
      for (int step = 0; step < cfg.max_csteps; ++step) {
        std::vector<int> next = mcd_detail::closest(z, fit, h);
        SubsetFit nf = mcd_detail::fit_subset(z, next);
        if (!nf.ok) break;
        const bool improved = nf.log_det < fit.log_det - 1e-12;
        fit = std::move(nf);
        idx = std::move(next);
        if (!improved) break;
      }
      if (static_cast<int>(idx.size()) == h) consider(std::move(fit), std::move(idx));
    }
  }

  McdResult out;
  if (best_idx.empty()) {
    warn("MCD did not find a nonsingular support subset; using the full-sample covariance");
    out.mean = z.colwise().mean().transpose();
    out.covariance = sample_covariance(z, out.mean);
    out.support.resize(static_cast<std::size_t>(n));
    std::iota(out.support.begin(), out.support.end(), 0);
    out.converged = false;
    return out;
  }
  out.mean = std::move(best.mean);
  out.covariance = std::move(best.cov);
  out.support = std::move(best_idx);
  return out;
}

// ---------------------------------------------------------------------------
// Robust density estimation

struct RdeConfig {
  int components = 0;  // 0 = min(100, n - 1)
  KernelConfig kernel;
  McdConfig mcd;
  std::optional<double> ridge;  // default_ridge() of the MCD covariance when unset
};

struct RobustProjectedModel {
  KernelPca projection;
  GaussianModel robust;  // MCD mean/covariance in projected space
};

inline RobustProjectedModel rde_fit(const MatrixXd& points, const RdeConfig& cfg = {}) {
  const int wanted = cfg.components > 0 ? cfg.components
                                        : static_cast<int>(std::min<Eigen::Index>(100, points.rows() - 1));
  if (points.rows() < wanted + 1)
    throw DataError("rde_fit: need at least components + 1 training vectors");
  KernelPca kpca(points, wanted, cfg.kernel);
  const MatrixXd z = kpca.project_rows(points);
  McdResult mcd = fit_mcd(z, cfg.mcd);
  const double r = cfg.ridge.value_or(default_ridge(mcd.covariance));
  return {std::move(kpca), GaussianModel(std::move(mcd.mean), std::move(mcd.covariance), r)};
}

inline double rde_score(const VectorXd& x, const RobustProjectedModel& model) {
  return model.robust.distance(model.projection.project(x));
}

// ---------------------------------------------------------------------------
// Empirical-CDF rank fusion

class EcdfTable {
 public:
  EcdfTable() = default;
  explicit EcdfTable(std::vector<double> values) : sorted_(std::move(values)) {
    if (sorted_.empty()) throw DataError("EcdfTable: empty training scores");
    std::sort(sorted_.begin(), sorted_.end());
  }

  /// Number of training scores <= u.
  std::size_t count(double u) const {
    return static_cast<std::size_t>(std::upper_bound(sorted_.begin(), sorted_.end(), u) - sorted_.begin());
  }

  /// Fraction of training scores <= u.
  double cdf(double u) const { return static_cast<double>(count(u)) / static_cast<double>(sorted_.size()); }

  std::size_t size() const { return sorted_.size(); }

  const std::vector<double>& values() const { return sorted_; }
  bool empty() const { return sorted_.empty(); }

 private:
  std::vector<double> sorted_;
};

inline ScoreValue huq(ScoreValue ppl, ScoreValue density, const EcdfTable& ppl_table,
                      const EcdfTable& density_table) {
  if (!ppl || !density || ppl_table.empty() || density_table.empty()) return ScoreValue::missing();
  // One rounding over integer counts, so equal rationals give equal doubles.
  const double na = static_cast<double>(ppl_table.size());
  const double nb = static_cast<double>(density_table.size());
  const double ca = static_cast<double>(ppl_table.count(ppl.value()));
  const double cb = static_cast<double>(density_table.count(density.value()));
  return (ca * nb + cb * na) / (2.0 * na * nb);
}

// ---------------------------------------------------------------------------
// Serialization (one JSON record per line, like trace files)

namespace json_detail {
inline nlohmann::ordered_json vec(const VectorXd& v) {
  return std::vector<double>(v.data(), v.data() + v.size());
}
inline nlohmann::ordered_json mat(const MatrixXd& m) {
  nlohmann::ordered_json rows = nlohmann::ordered_json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    const VectorXd r = m.row(i).transpose();
    rows.push_back(vec(r));
  }
  return rows;
}
inline VectorXd to_vec(const nlohmann::ordered_json& j) {
  auto v = j.get<std::vector<double>>();
  return Eigen::Map<VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}
inline MatrixXd to_mat(const nlohmann::ordered_json& j) {
  const auto n = static_cast<Eigen::Index>(j.size());
  const Eigen::Index m = n ? static_cast<Eigen::Index>(j[0].size()) : 0;
  MatrixXd out(n, m);
  for (Eigen::Index i = 0; i < n; ++i) {
    if (static_cast<Eigen::Index>(j[static_cast<std::size_t>(i)].size()) != m)
      throw DataError("model file: ragged matrix");
    out.row(i) = to_vec(j[static_cast<std::size_t>(i)]).transpose();
  }
  return out;
}
}  // namespace json_detail

inline nlohmann::ordered_json to_json(const GaussianModel& m) {
  return {{"mean", json_detail::vec(m.mean())},
          {"covariance", json_detail::mat(m.covariance())},
          {"ridge", m.ridge()}};
}

inline GaussianModel gaussian_from_json(const nlohmann::ordered_json& j) {
  return GaussianModel(json_detail::to_vec(j.at("mean")), json_detail::to_mat(j.at("covariance")),
                       j.at("ridge").get<double>());
}

inline nlohmann::ordered_json KernelPca::to_json() const {
  return {{"kernel", kernel_.type == KernelType::kRbf ? "rbf" : "linear"},
          {"bandwidth", kernel_.bandwidth},
          {"landmarks", json_detail::mat(landmarks_)},
          {"alphas", json_detail::mat(alphas_)},
          {"col_mean", json_detail::vec(col_mean_)},
          {"all_mean", all_mean_}};
}

inline KernelPca KernelPca::from_json(const nlohmann::ordered_json& j) {
  KernelPca k;
  const auto type = j.at("kernel").get<std::string>();
  if (type != "rbf" && type != "linear") throw DataError("model file: unknown kernel '" + type + "'");
  k.kernel_.type = type == "rbf" ? KernelType::kRbf : KernelType::kLinear;
  k.kernel_.bandwidth = j.at("bandwidth").get<double>();
  k.landmarks_ = json_detail::to_mat(j.at("landmarks"));
  k.alphas_ = json_detail::to_mat(j.at("alphas"));
  k.col_mean_ = json_detail::to_vec(j.at("col_mean"));
  k.all_mean_ = j.at("all_mean").get<double>();
  return k;
}

inline nlohmann::ordered_json to_json(const RobustProjectedModel& m) {
  return {{"projection", m.projection.to_json()}, {"robust", to_json(m.robust)}};
}

inline RobustProjectedModel rde_from_json(const nlohmann::ordered_json& j) {
  return {KernelPca::from_json(j.at("projection")), gaussian_from_json(j.at("robust"))};
}

}  // namespace uqbench::density

#endif  // UQBENCH_DENSITY_EST_HPP_
