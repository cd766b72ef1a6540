#pragma once

// Damage localization and detection scoring.

#include <algorithm>
#include <string>
#include <vector>

#include "fpcpd/tensor.hpp"

namespace fpcpd::shm {

inline constexpr std::size_t kDefaultNeighbors = 2;

/// score[s] = mean Euclidean distance from row s to its k nearest other rows.
inline Eigen::VectorXd localization_scores(const Matrix& rows, std::size_t k = kDefaultNeighbors) {
  const auto n = static_cast<std::size_t>(rows.rows());
  if (k < 1 || k >= n)
    throw InvalidArgument("k must be in [1, rows), got k=" + std::to_string(k) + " with " + std::to_string(n) + " rows");
  Eigen::VectorXd score(static_cast<Eigen::Index>(n));
  std::vector<double> dist;
  for (std::size_t s = 0; s < n; ++s) {
    dist.clear();
    for (std::size_t o = 0; o < n; ++o)
      if (o != s) dist.push_back((rows.row(static_cast<Eigen::Index>(s)) - rows.row(static_cast<Eigen::Index>(o))).norm());
    std::partial_sort(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(k), dist.end());
    double sum = 0.0;
    for (std::size_t q = 0; q < k; ++q) sum += dist[q];
    score(static_cast<Eigen::Index>(s)) = sum / static_cast<double>(k);
  }
  return score;
}

/**
 * Harmonic mean of precision and recall, evaluated as 2tp / (2tp + fp + fn)
 * (same value, one rounding). 0 when tp == 0, which covers the cases where
 * precision or recall is undefined.
 */
inline double f_score(std::size_t tp, std::size_t fp, std::size_t fn) {
  if (tp == 0) return 0.0;
  return static_cast<double>(2 * tp) / static_cast<double>(2 * tp + fp + fn);
}

}  // namespace fpcpd::shm
