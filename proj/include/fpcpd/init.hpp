#pragma once

// Factor initialization.
//
// Random: entries i.i.d. uniform on [0, 1).
// GEVD (direct trilinear decomposition): compress two random mode-3
// mixtures of the frontal slices onto the leading R-dim subspaces of modes 1
// and 2, read A off the eigenvectors of the resulting R x R pencil, then
// recover each (b_r, c_r) pair as the leading singular pair of the matching
// row of pinv(A) X_(1). Exact for noiseless data of rank R <= min(I, J)
// with K >= 2; otherwise falls back to random.

#include <optional>
#include <random>
#include <string>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include "fpcpd/solver_common.hpp"

namespace fpcpd {

namespace detail {

/// Leading eigenvectors of m m^T, i.e. the dominant left singular subspace.
inline Eigen::MatrixXd leading_left_vectors(const Matrix& m, std::size_t count) {
  const Eigen::MatrixXd gram = m * m.transpose();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(gram);
  return eig.eigenvectors().rightCols(static_cast<Eigen::Index>(count)).rowwise().reverse();
}

}  // namespace detail

/// Returns the GEVD initialization, or std::nullopt when it is not applicable or breaks down numerically.
inline std::optional<FactorModel> gevd_factors(const DenseTensor3& t, std::size_t rank, std::uint64_t seed) {
  const Dims d = t.dims();
  if (rank > d.I || rank > d.J || d.K < 2) return std::nullopt;
  const auto R = static_cast<Eigen::Index>(rank);

  const Eigen::MatrixXd U = detail::leading_left_vectors(unfold(t, Mode::First), rank);
  const Eigen::MatrixXd V = detail::leading_left_vectors(unfold(t, Mode::Second), rank);

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  Eigen::VectorXd w1(d.K), w2(d.K);
  for (std::size_t k = 0; k < d.K; ++k) {
    w1(k) = normal(rng);
    w2(k) = normal(rng);
  }
  Eigen::MatrixXd s1 = Eigen::MatrixXd::Zero(d.I, d.J), s2 = s1;
  for (std::size_t k = 0; k < d.K; ++k)
    for (std::size_t j = 0; j < d.J; ++j)
      for (std::size_t i = 0; i < d.I; ++i) {
        s1(i, j) += w1(k) * t(i, j, k);
        s2(i, j) += w2(k) * t(i, j, k);
      }
  const Eigen::MatrixXd t1 = U.transpose() * s1 * V;
  const Eigen::MatrixXd t2 = U.transpose() * s2 * V;
  // t1 * inv(t2) = (U^T A) D (U^T A)^{-1}
  const Eigen::MatrixXd pencil = t2.transpose().colPivHouseholderQr().solve(t1.transpose()).transpose();
  Eigen::EigenSolver<Eigen::MatrixXd> eig(pencil);
  if (eig.info() != Eigen::Success) return std::nullopt;

  Matrix A = U * eig.eigenvectors().real();
  const Matrix proj = A.completeOrthogonalDecomposition().pseudoInverse() * unfold(t, Mode::First);
  Matrix B(d.J, R), C(d.K, R);
  Eigen::MatrixXd slab(d.J, d.K);
  for (Eigen::Index r = 0; r < R; ++r) {
    for (std::size_t k = 0; k < d.K; ++k)
      for (std::size_t j = 0; j < d.J; ++j) slab(j, k) = proj(r, j + d.J * k);
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(slab, Eigen::ComputeThinU | Eigen::ComputeThinV);
    B.col(r) = svd.matrixU().col(0) * svd.singularValues()(0);
    C.col(r) = svd.matrixV().col(0);
  }
  FactorModel f(std::move(A), std::move(B), std::move(C));
  if (!f.all_finite()) return std::nullopt;
  return f;
}

inline FactorModel initial_factors(const DenseTensor3& t, std::size_t rank, std::uint64_t seed, InitMethod method) {
  if (method == InitMethod::Gevd)
    if (auto f = gevd_factors(t, rank, seed)) return std::move(*f);
  return random_factors(t.dims(), rank, seed);
}

inline FactorModel initial_factors(const DenseTensor3& t, const SolverConfig& cfg) {
  return initial_factors(t, cfg.rank, cfg.seed, cfg.init);
}

}  // namespace fpcpd
