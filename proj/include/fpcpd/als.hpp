#pragma once

/**
 * @file als.hpp
 * CP-ALS: cyclic least-squares updates of A, B and C.
 *
 * Each update solves the normal equations
 *   A <- X_(1) (C kr B) [(C^T C) * (B^T B)]^{-1}
 * (and the analogous forms for B and C). The matricized-tensor times
 * Khatri-Rao product is accumulated entry by entry without forming C kr B.
 */

#include "fpcpd/init.hpp"
#include "fpcpd/solver_common.hpp"

namespace fpcpd {

/// X_(n) times the Khatri-Rao product of the two other factors.
inline Matrix mttkrp(const DenseTensor3& t, const FactorModel& f, Mode mode) {
  const Dims d = t.dims();
  const Eigen::Index R = f.A.cols();
  Matrix out = Matrix::Zero(f.factor(mode).rows(), R);
  for (std::size_t k = 0; k < d.K; ++k)
    for (std::size_t j = 0; j < d.J; ++j)
      for (std::size_t i = 0; i < d.I; ++i) {
        const double x = t(i, j, k);
        if (x == 0.0) continue;
        switch (mode) {
          case Mode::First: out.row(i) += x * f.B.row(j).cwiseProduct(f.C.row(k)); break;
          case Mode::Second: out.row(j) += x * f.A.row(i).cwiseProduct(f.C.row(k)); break;
          case Mode::Third: out.row(k) += x * f.A.row(i).cwiseProduct(f.B.row(j)); break;
        }
      }
  return out;
}

/// Hadamard product of the Gram matrices of the two factors other than @p mode.
inline Matrix gram_hadamard(const FactorModel& f, Mode mode) {
  auto gram = [](const Matrix& m) -> Matrix { return m.transpose() * m; };
  switch (mode) {
    case Mode::First: return gram(f.B).cwiseProduct(gram(f.C));
    case Mode::Second: return gram(f.A).cwiseProduct(gram(f.C));
    case Mode::Third: return gram(f.A).cwiseProduct(gram(f.B));
  }
  return {};
}

/// One outer ALS iteration (A, then B, then C) in place.
inline void als_sweep(const DenseTensor3& t, FactorModel& f) {
  for (Mode m : {Mode::First, Mode::Second, Mode::Third})
    f.factor(m) = solve_gram(gram_hadamard(f, m), mttkrp(t, f, m));
}

/// ALS from a given starting point.
inline FitResult als_fit(const DenseTensor3& t, const SolverConfig& cfg, FactorModel init) {
  cfg.validate();
  require_same_dims(t, init);
  Stopwatch clock;
  FitResult res{std::move(init), {}};
  ConvergenceMonitor monitor(cfg.tol);
  for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
    als_sweep(t, res.model);
    const double l = loss(t, res.model);
    res.trace.push_back(make_record(epoch, clock.seconds(), l, t.size()));
    if (monitor.update(l)) break;
  }
  return res;
}

/// ALS started from initial_factors(t, cfg) (uniform random unless cfg.init says otherwise).
inline FitResult als_fit(const DenseTensor3& t, const SolverConfig& cfg) {
  cfg.validate();
  return als_fit(t, cfg, initial_factors(t, cfg));
}

}  // namespace fpcpd
