#pragma once

#include <cstring>
#include <random>

#include "fpcpd/tensor.hpp"

namespace fpcpd::testing {

inline DenseTensor3 random_tensor(Dims d, std::mt19937_64& rng, double lo = -1.0, double hi = 1.0) {
  std::uniform_real_distribution<double> u(lo, hi);
  std::vector<double> v(d.size());
  for (double& x : v) x = u(rng);
  return DenseTensor3(d, std::move(v));
}

inline Matrix random_matrix(std::size_t rows, std::size_t cols, std::mt19937_64& rng, double lo = -1.0,
                            double hi = 1.0) {
  std::uniform_real_distribution<double> u(lo, hi);
  Matrix m(rows, cols);
  for (Eigen::Index n = 0; n < m.size(); ++n) m.data()[n] = u(rng);
  return m;
}

inline FactorModel random_model(Dims d, std::size_t rank, std::mt19937_64& rng, double lo = -1.0, double hi = 1.0) {
  return FactorModel(random_matrix(d.I, rank, rng, lo, hi), random_matrix(d.J, rank, rng, lo, hi),
                     random_matrix(d.K, rank, rng, lo, hi));
}

/// Entry-by-entry definition of the CP model, independent of reconstruct().
inline double cp_value(const FactorModel& f, std::size_t i, std::size_t j, std::size_t k) {
  double s = 0.0;
  for (Eigen::Index r = 0; r < f.A.cols(); ++r) s += f.A(i, r) * f.B(j, r) * f.C(k, r);
  return s;
}

inline double half_loss_bruteforce(const DenseTensor3& t, const FactorModel& f) {
  double s = 0.0;
  const Dims d = t.dims();
  for (std::size_t i = 0; i < d.I; ++i)
    for (std::size_t j = 0; j < d.J; ++j)
      for (std::size_t k = 0; k < d.K; ++k) {
        const double e = t(i, j, k) - cp_value(f, i, j, k);
        s += e * e;
      }
  return 0.5 * s;
}

/// Central finite-difference gradient of loss/2 with respect to one factor.
inline Matrix fd_gradient(const DenseTensor3& t, FactorModel f, Mode mode, double h = 1e-6) {
  Matrix& target = f.factor(mode);
  Matrix g(target.rows(), target.cols());
  for (Eigen::Index r = 0; r < target.rows(); ++r)
    for (Eigen::Index c = 0; c < target.cols(); ++c) {
      const double keep = target(r, c);
      target(r, c) = keep + h;
      const double up = half_loss_bruteforce(t, f);
      target(r, c) = keep - h;
      const double down = half_loss_bruteforce(t, f);
      target(r, c) = keep;
      g(r, c) = (up - down) / (2.0 * h);
    }
  return g;
}

inline bool bitwise_equal(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) return false;
  return std::memcmp(a.data(), b.data(), sizeof(double) * static_cast<std::size_t>(a.size())) == 0;
}

}  // namespace fpcpd::testing
