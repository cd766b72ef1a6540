#pragma once

// Sampled alternating least squares (SALS baseline).
//
// Each epoch cycles the three modes. For a mode, a fresh uniform sample of
// batch_fraction * IJK entries is drawn; every factor row that occurs in the
// sample is moved by the least-squares correction fitted to its sampled
// residuals:
//   a_i += (sum_s z_s z_s^T)^{-1} sum_s e_s z_s,   z_s = b_j .* c_k,
// with the same ridge damping as ALS. Rows that are not sampled keep their
// value. With batch_fraction == 1 this is exactly one ALS sweep.

#include <algorithm>
#include <numeric>
#include <random>
#include <vector>

#include "fpcpd/init.hpp"
#include "fpcpd/solver_common.hpp"

namespace fpcpd {

namespace detail {

/// Sorted sample of `count` distinct linear indices out of `total`.
inline std::vector<std::size_t> sample_entries(std::size_t total, std::size_t count, std::mt19937_64& rng) {
  std::vector<std::size_t> out;
  if (count >= total) {
    out.resize(total);
    std::iota(out.begin(), out.end(), std::size_t{0});
    return out;
  }
  out.reserve(count);
  std::vector<std::size_t> all(total);
  std::iota(all.begin(), all.end(), std::size_t{0});
  std::sample(all.begin(), all.end(), std::back_inserter(out), count, rng);
  return out;
}

inline void sampled_mode_update(const DenseTensor3& t, FactorModel& f, Mode mode,
                                const std::vector<std::size_t>& sample) {
  const Dims d = t.dims();
  const Eigen::Index R = f.A.cols();
  Matrix& target = f.factor(mode);
  const Eigen::Index rows = target.rows();

  std::vector<Matrix> gram(rows, Matrix::Zero(R, R));
  Matrix rhs = Matrix::Zero(rows, R);
  std::vector<bool> touched(rows, false);
  Eigen::RowVectorXd z(R);

  for (std::size_t lin : sample) {
    const std::size_t i = lin % d.I;
    const std::size_t j = (lin / d.I) % d.J;
    const std::size_t k = lin / (d.I * d.J);
    std::size_t row = 0;
    switch (mode) {
      case Mode::First: z = f.B.row(j).cwiseProduct(f.C.row(k)); row = i; break;
      case Mode::Second: z = f.A.row(i).cwiseProduct(f.C.row(k)); row = j; break;
      case Mode::Third: z = f.A.row(i).cwiseProduct(f.B.row(j)); row = k; break;
    }
    const double res = t(i, j, k) - model_entry(f, i, j, k);
    gram[row].noalias() += z.transpose() * z;
    rhs.row(row) += res * z;
    touched[row] = true;
  }
  for (Eigen::Index r = 0; r < rows; ++r)
    if (touched[r]) target.row(r) += solve_gram(gram[r], rhs.row(r));
}

}  // namespace detail

/// One SALS epoch (modes 1, 2, 3) in place.
inline void sals_sweep(const DenseTensor3& t, FactorModel& f, double batch_fraction, std::mt19937_64& rng) {
  const auto count = static_cast<std::size_t>(std::ceil(batch_fraction * static_cast<double>(t.size())));
  for (Mode m : {Mode::First, Mode::Second, Mode::Third})
    detail::sampled_mode_update(t, f, m, detail::sample_entries(t.size(), std::max<std::size_t>(count, 1), rng));
}

inline FitResult sals_fit(const DenseTensor3& t, const SolverConfig& cfg, FactorModel init) {
  cfg.validate();
  require_same_dims(t, init);
  std::mt19937_64 rng(cfg.seed ^ 0x243f6a8885a308d3ULL);
  Stopwatch clock;
  FitResult res{std::move(init), {}};
  ConvergenceMonitor monitor(cfg.tol);
  for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
    sals_sweep(t, res.model, cfg.batch_fraction, rng);
    const double l = loss(t, res.model);
    res.trace.push_back(make_record(epoch, clock.seconds(), l, t.size()));
    if (monitor.update(l)) break;
  }
  return res;
}

inline FitResult sals_fit(const DenseTensor3& t, const SolverConfig& cfg) {
  cfg.validate();
  return sals_fit(t, cfg, initial_factors(t, cfg));
}

}  // namespace fpcpd
