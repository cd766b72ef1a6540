#pragma once

// Mode-wise descent directions of the CP least-squares loss.
//
// mode_gradient returns R_(n) * KR_n, the residual unfolding times the
// Khatri-Rao product of the two other factors. This is the negative gradient
// of loss/2, so adding eta times it descends.

#include <optional>

#include "fpcpd/block_plan.hpp"
#include "fpcpd/tensor.hpp"

namespace fpcpd {

namespace detail {

inline void accumulate_entry(const DenseTensor3& t, const FactorModel& f, Mode mode, const Entry& e, Matrix& g) {
  const Eigen::Index R = f.A.cols();
  const double res = t(e.i, e.j, e.k) - model_entry(f, e.i, e.j, e.k);
  const double* a = f.A.data() + e.i * R;
  const double* b = f.B.data() + e.j * R;
  const double* c = f.C.data() + e.k * R;
  switch (mode) {
    case Mode::First:
      for (Eigen::Index r = 0; r < R; ++r) g(e.i, r) += res * b[r] * c[r];
      break;
    case Mode::Second:
      for (Eigen::Index r = 0; r < R; ++r) g(e.j, r) += res * a[r] * c[r];
      break;
    case Mode::Third:
      for (Eigen::Index r = 0; r < R; ++r) g(e.k, r) += res * a[r] * b[r];
      break;
  }
}

}  // namespace detail

/// Descent direction over the full tensor.
inline Matrix mode_gradient(const DenseTensor3& t, const FactorModel& f, Mode mode) {
  require_same_dims(t, f);
  const Matrix& target = f.factor(mode);
  Matrix g = Matrix::Zero(target.rows(), target.cols());
  const Dims d = t.dims();
  for (std::size_t k = 0; k < d.K; ++k)
    for (std::size_t j = 0; j < d.J; ++j)
      for (std::size_t i = 0; i < d.I; ++i) detail::accumulate_entry(t, f, mode, {i, j, k}, g);
  return g;
}

/// Descent direction of the per-block loss: only the listed entries contribute.
inline Matrix mode_gradient(const DenseTensor3& t, const FactorModel& f, Mode mode, Block restriction) {
  require_same_dims(t, f);
  const Dims d = t.dims();
  const Matrix& target = f.factor(mode);
  Matrix g = Matrix::Zero(target.rows(), target.cols());
  for (const Entry& e : restriction) {
    if (e.i >= d.I || e.j >= d.J || e.k >= d.K) throw InvalidArgument("block entry outside tensor dims");
    detail::accumulate_entry(t, f, mode, e, g);
  }
  return g;
}

inline Matrix mode_gradient(const DenseTensor3& t, const FactorModel& f, int mode,
                            std::optional<Block> restriction = std::nullopt) {
  return restriction ? mode_gradient(t, f, to_mode(mode), *restriction) : mode_gradient(t, f, to_mode(mode));
}

}  // namespace fpcpd
