#pragma once

/**
 * @file corcondia.hpp
 * Core consistency diagnostic for a CP fit.
 *
 * The least-squares Tucker core of X in the bases A, B, C is
 *   G = X x1 pinv(A) x2 pinv(B) x3 pinv(C)
 * and the diagnostic is 100 * (1 - sum (G_pqr - T_pqr)^2 / R) with T the
 * superdiagonal identity core. An exact CP fit scores 100; values fall as
 * the core picks up off-superdiagonal mass.
 */

#include <Eigen/SVD>

#include "fpcpd/tensor.hpp"

namespace fpcpd {

struct CorcondiaResult {
  double value = 0.0;
  /// True when at least one factor was numerically rank deficient and a damped pseudo-inverse was used.
  bool damped = false;
};

namespace detail {

/// Relative singular-value cutoff below which a factor counts as rank deficient.
inline constexpr double kRankCutoff = 1e-10;

/// Pseudo-inverse (R x n) of an n x R factor; Tikhonov-damped when rank deficient.
inline Matrix factor_pinv(const Matrix& m, bool& damped) {
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(Eigen::MatrixXd(m), Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Eigen::VectorXd& s = svd.singularValues();
  const double smax = s.size() > 0 ? s(0) : 0.0;
  const bool deficient = s.size() < m.cols() || smax == 0.0 || s(s.size() - 1) < kRankCutoff * smax;
  Eigen::VectorXd inv(s.size());
  if (!deficient) {
    inv = s.cwiseInverse();
  } else {
    damped = true;
    const double delta = (kRankCutoff * smax) * (kRankCutoff * smax);
    for (Eigen::Index n = 0; n < s.size(); ++n) inv(n) = s(n) > 0.0 ? s(n) / (s(n) * s(n) + delta) : 0.0;
  }
  return svd.matrixV() * inv.asDiagonal() * svd.matrixU().transpose();
}

}  // namespace detail

/// Least-squares Tucker core (R x R x R) of t in the bases of f.
inline DenseTensor3 tucker_core(const DenseTensor3& t, const FactorModel& f, bool* damped = nullptr) {
  require_same_dims(t, f);
  bool was_damped = false;
  const Matrix pa = detail::factor_pinv(f.A, was_damped);
  const Matrix pb = detail::factor_pinv(f.B, was_damped);
  const Matrix pc = detail::factor_pinv(f.C, was_damped);
  if (damped) *damped = was_damped;

  const Dims d = t.dims();
  const std::size_t R = f.rank();
  // Contract one mode at a time: (I,J,K) -> (R,J,K) -> (R,R,K) -> (R,R,R).
  DenseTensor3 t1({R, d.J, d.K});
  for (std::size_t k = 0; k < d.K; ++k)
    for (std::size_t j = 0; j < d.J; ++j)
      for (std::size_t i = 0; i < d.I; ++i) {
        const double x = t(i, j, k);
        if (x == 0.0) continue;
        for (std::size_t p = 0; p < R; ++p) t1(p, j, k) += pa(p, i) * x;
      }
  DenseTensor3 t2({R, R, d.K});
  for (std::size_t k = 0; k < d.K; ++k)
    for (std::size_t j = 0; j < d.J; ++j)
      for (std::size_t q = 0; q < R; ++q)
        for (std::size_t p = 0; p < R; ++p) t2(p, q, k) += pb(q, j) * t1(p, j, k);
  DenseTensor3 core({R, R, R});
  for (std::size_t k = 0; k < d.K; ++k)
    for (std::size_t r = 0; r < R; ++r)
      for (std::size_t q = 0; q < R; ++q)
        for (std::size_t p = 0; p < R; ++p) core(p, q, r) += pc(r, k) * t2(p, q, k);
  return core;
}

inline CorcondiaResult corcondia(const DenseTensor3& t, const FactorModel& f) {
  CorcondiaResult out;
  const DenseTensor3 core = tucker_core(t, f, &out.damped);
  const std::size_t R = f.rank();
  double dev = 0.0;
  for (std::size_t r = 0; r < R; ++r)
    for (std::size_t q = 0; q < R; ++q)
      for (std::size_t p = 0; p < R; ++p) {
        const double target = (p == q && q == r) ? 1.0 : 0.0;
        const double e = core(p, q, r) - target;
        dev += e * e;
      }
  out.value = 100.0 * (1.0 - dev / static_cast<double>(R));
  return out;
}

}  // namespace fpcpd
