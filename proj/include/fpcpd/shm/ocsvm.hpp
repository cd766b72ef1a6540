#pragma once

/**
 * @file ocsvm.hpp
 * One-class SVM with a Gaussian kernel, trained by SMO on the dual
 *
 *   min 1/2 a^T Q a   s.t.  0 <= a_i <= 1/(nu n),  sum a_i = 1,
 *
 * with Q_ij = exp(-|x_i - x_j|^2 / (2 sigma^2)). The decision value of x is
 * sum_s a_s k(x_s, x) - rho; negative means anomalous.
 */

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "fpcpd/tensor.hpp"

namespace fpcpd::shm {

inline constexpr double kDefaultNu = 0.05;
inline constexpr double kKktTolerance = 1e-6;

struct OcsvmModel {
  Matrix support;          ///< support vectors, one per row
  Eigen::VectorXd alpha;   ///< dual coefficients of the support vectors
  double rho = 0.0;
  double sigma = 1.0;
  double nu = kDefaultNu;
  bool sigma_floored = false;  ///< median heuristic hit the floor (near-identical rows)
  std::size_t iterations = 0;

  double kernel(const Eigen::RowVectorXd& x, const Eigen::RowVectorXd& y) const {
    return std::exp(-(x - y).squaredNorm() / (2.0 * sigma * sigma));
  }

  double decision(const Eigen::RowVectorXd& row) const {
    if (row.size() != support.cols())
      throw InvalidArgument("decision row has " + std::to_string(row.size()) + " entries, model expects " +
                            std::to_string(support.cols()));
    double s = 0.0;
    for (Eigen::Index n = 0; n < support.rows(); ++n) s += alpha(n) * kernel(support.row(n), row);
    return s - rho;
  }
};

inline double ocsvm_decision(const OcsvmModel& m, const Eigen::RowVectorXd& row) { return m.decision(row); }

/// Median pairwise Euclidean distance, floored at 1e-6 * max(1, largest row norm).
inline double median_heuristic_sigma(const Matrix& rows, bool* floored = nullptr) {
  std::vector<double> dist;
  const Eigen::Index n = rows.rows();
  dist.reserve(static_cast<std::size_t>(n * (n - 1) / 2));
  double scale = 1.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    scale = std::max(scale, rows.row(i).norm());
    for (Eigen::Index j = i + 1; j < n; ++j) dist.push_back((rows.row(i) - rows.row(j)).norm());
  }
  const double floor = 1e-6 * scale;
  double med = 0.0;
  if (!dist.empty()) {
    auto mid = dist.begin() + static_cast<std::ptrdiff_t>(dist.size() / 2);
    std::nth_element(dist.begin(), mid, dist.end());
    med = *mid;
    if (dist.size() % 2 == 0) med = 0.5 * (med + *std::max_element(dist.begin(), mid));
  }
  if (floored) *floored = !(med > floor);
  return std::max(med, floor);
}

inline OcsvmModel ocsvm_train(const Matrix& rows, double nu = kDefaultNu, std::optional<double> sigma = std::nullopt,
                              std::size_t max_iterations = 1000000) {
  const Eigen::Index n = rows.rows();
  if (n < 2) throw InvalidArgument("one-class SVM needs at least 2 training rows, got " + std::to_string(n));
  if (!(nu > 0.0 && nu < 1.0)) throw InvalidArgument("nu must lie in (0, 1)");
  if (!rows.allFinite()) throw InvalidArgument("training rows must be finite");

  OcsvmModel m;
  m.nu = nu;
  if (sigma) {
    if (!(*sigma > 0.0)) throw InvalidArgument("sigma must be positive");
    m.sigma = *sigma;
  } else {
    m.sigma = median_heuristic_sigma(rows, &m.sigma_floored);
  }

  Eigen::MatrixXd Q(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = i; j < n; ++j) Q(i, j) = Q(j, i) = m.kernel(rows.row(i), rows.row(j));

  const double C = 1.0 / (nu * static_cast<double>(n));
  // Feasible start: fill coefficients up to the box bound in order.
  Eigen::VectorXd a = Eigen::VectorXd::Zero(n);
  double left = 1.0;
  for (Eigen::Index i = 0; i < n && left > 0.0; ++i) {
    a(i) = std::min(C, left);
    left -= a(i);
  }
  Eigen::VectorXd G = Q * a;

  // Maximal violating pair: raise a_i (a_i < C, smallest gradient), lower a_j (a_j > 0, largest gradient).
  const double eps = 1e-12;
  for (; m.iterations < max_iterations; ++m.iterations) {
    Eigen::Index i = -1, j = -1;
    double gi = std::numeric_limits<double>::infinity(), gj = -std::numeric_limits<double>::infinity();
    for (Eigen::Index t = 0; t < n; ++t) {
      if (a(t) < C - eps && G(t) < gi) gi = G(t), i = t;
      if (a(t) > eps && G(t) > gj) gj = G(t), j = t;
    }
    if (i < 0 || j < 0 || gj - gi < kKktTolerance) break;
    const double curv = std::max(Q(i, i) + Q(j, j) - 2.0 * Q(i, j), 1e-12);
    const double step = std::min({(gj - gi) / curv, C - a(i), a(j)});
    a(i) += step;
    a(j) -= step;
    G += step * (Q.col(i) - Q.col(j));
  }

  // rho from the free coefficients (lowest gradient, so every free SV sits on or inside the boundary);
  // midpoint of the KKT interval when none are free.
  double free_min = std::numeric_limits<double>::infinity();
  double upper = std::numeric_limits<double>::infinity(), lower = -std::numeric_limits<double>::infinity();
  for (Eigen::Index t = 0; t < n; ++t) {
    if (a(t) > eps && a(t) < C - eps) free_min = std::min(free_min, G(t));
    if (a(t) < C - eps) upper = std::min(upper, G(t));
    if (a(t) > eps) lower = std::max(lower, G(t));
  }
  m.rho = std::isfinite(free_min) ? free_min : 0.5 * (upper + lower);

  std::vector<Eigen::Index> sv;
  for (Eigen::Index t = 0; t < n; ++t)
    if (a(t) > eps) sv.push_back(t);
  m.support.resize(static_cast<Eigen::Index>(sv.size()), rows.cols());
  m.alpha.resize(static_cast<Eigen::Index>(sv.size()));
  for (std::size_t s = 0; s < sv.size(); ++s) {
    m.support.row(static_cast<Eigen::Index>(s)) = rows.row(sv[s]);
    m.alpha(static_cast<Eigen::Index>(s)) = a(sv[s]);
  }
  return m;
}

}  // namespace fpcpd::shm
