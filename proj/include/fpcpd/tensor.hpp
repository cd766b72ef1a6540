#pragma once

/**
 * @file tensor.hpp
 * Dense order-3 tensors, CP factor models and the multilinear primitives
 * shared by every solver: unfolding, Khatri-Rao product, reconstruction and
 * the squared-error loss.
 *
 * Storage is mode-1 fastest: entry (i,j,k) lives at i + I*(j + J*k).
 * Unfoldings follow the Kolda-Bader column ordering, so that
 *   X_(1) = A (C kr B)^T,  X_(2) = B (C kr A)^T,  X_(3) = C (B kr A)^T.
 */

#include <array>
#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace fpcpd {

/// Row-major so that a factor row (the unit touched by one SGD update) is contiguous.
using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;

/// Base class for all errors raised by the library.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Raised when arguments violate a documented precondition.
class InvalidArgument : public Error {
public:
  using Error::Error;
};

enum class Mode : int { First = 1, Second = 2, Third = 3 };

inline Mode to_mode(int m) {
  if (m < 1 || m > 3)
    throw InvalidArgument("mode must be 1, 2 or 3 (got " + std::to_string(m) + ")");
  return static_cast<Mode>(m);
}

struct Dims {
  std::size_t I = 0, J = 0, K = 0;

  std::size_t size() const { return I * J * K; }
  std::size_t operator[](Mode m) const {
    switch (m) {
      case Mode::First: return I;
      case Mode::Second: return J;
      case Mode::Third: return K;
    }
    return 0;
  }
  friend bool operator==(const Dims&, const Dims&) = default;
};

inline std::string to_string(const Dims& d) {
  return std::to_string(d.I) + "x" + std::to_string(d.J) + "x" + std::to_string(d.K);
}

/// Parses "IxJxK" (also accepts ',' as separator).
inline Dims parse_dims(const std::string& s) {
  std::size_t v[3] = {0, 0, 0};
  std::size_t pos = 0;
  for (int n = 0; n < 3; ++n) {
    const std::size_t end = n < 2 ? s.find_first_of("x,", pos) : s.size();
    const std::string part = end == std::string::npos ? std::string() : s.substr(pos, end - pos);
    if (part.empty() || part.find_first_not_of("0123456789") != std::string::npos)
      throw InvalidArgument("bad dims '" + s + "', expected IxJxK");
    v[n] = std::stoull(part);
    if (v[n] == 0) throw InvalidArgument("bad dims '" + s + "': every dim must be positive");
    pos = end + 1;
  }
  return {v[0], v[1], v[2]};
}

/**
 * Dense order-3 tensor of finite doubles.
 *
 * Construction validates shape and rejects NaN/Inf. Element access through
 * operator() is unchecked; use at() for bounds checking.
 */
class DenseTensor3 {
public:
  DenseTensor3() = default;

  /// Zero tensor of the given shape.
  explicit DenseTensor3(Dims dims) : dims_(dims), values_(dims.size(), 0.0) { check_dims(dims); }

  DenseTensor3(Dims dims, std::vector<double> values) : dims_(dims), values_(std::move(values)) {
    check_dims(dims);
    if (values_.size() != dims.size())
      throw InvalidArgument("tensor value count " + std::to_string(values_.size()) +
                            " does not match dims " + to_string(dims));
    for (std::size_t n = 0; n < values_.size(); ++n)
      if (!std::isfinite(values_[n]))
        throw InvalidArgument("non-finite tensor entry at linear index " + std::to_string(n));
  }

  const Dims& dims() const { return dims_; }
  std::size_t size() const { return values_.size(); }

  std::size_t index(std::size_t i, std::size_t j, std::size_t k) const {
    return i + dims_.I * (j + dims_.J * k);
  }

  double operator()(std::size_t i, std::size_t j, std::size_t k) const { return values_[index(i, j, k)]; }
  double& operator()(std::size_t i, std::size_t j, std::size_t k) { return values_[index(i, j, k)]; }

  double at(std::size_t i, std::size_t j, std::size_t k) const {
    if (i >= dims_.I || j >= dims_.J || k >= dims_.K)
      throw InvalidArgument("tensor index out of range");
    return (*this)(i, j, k);
  }

  std::span<const double> values() const { return values_; }
  std::span<double> values() { return values_; }

  double squared_norm() const {
    double s = 0.0;
    for (double v : values_) s += v * v;
    return s;
  }

  friend bool operator==(const DenseTensor3&, const DenseTensor3&) = default;

private:
  static void check_dims(const Dims& d) {
    if (d.I == 0 || d.J == 0 || d.K == 0)
      throw InvalidArgument("tensor dims must be positive (got " + to_string(d) + ")");
  }

  Dims dims_{};
  std::vector<double> values_;
};

/**
 * CP factor matrices A (I x R), B (J x R), C (K x R) together with the
 * momentum state used by the accelerated solvers. Velocities start at zero.
 */
struct FactorModel {
  Matrix A, B, C;
  Matrix velA, velB, velC;

  FactorModel() = default;

  FactorModel(Matrix a, Matrix b, Matrix c) : A(std::move(a)), B(std::move(b)), C(std::move(c)) {
    if (A.cols() != B.cols() || A.cols() != C.cols() || A.cols() == 0)
      throw InvalidArgument("factor matrices must share a positive column count");
    reset_velocity();
  }

  /// Zero factors of the given shape.
  FactorModel(Dims dims, std::size_t rank)
      : FactorModel(Matrix::Zero(dims.I, rank), Matrix::Zero(dims.J, rank), Matrix::Zero(dims.K, rank)) {}

  std::size_t rank() const { return static_cast<std::size_t>(A.cols()); }
  Dims dims() const {
    return {static_cast<std::size_t>(A.rows()), static_cast<std::size_t>(B.rows()),
            static_cast<std::size_t>(C.rows())};
  }

  Matrix& factor(Mode m) { return m == Mode::First ? A : (m == Mode::Second ? B : C); }
  const Matrix& factor(Mode m) const { return m == Mode::First ? A : (m == Mode::Second ? B : C); }
  Matrix& velocity(Mode m) { return m == Mode::First ? velA : (m == Mode::Second ? velB : velC); }

  void reset_velocity() {
    velA = Matrix::Zero(A.rows(), A.cols());
    velB = Matrix::Zero(B.rows(), B.cols());
    velC = Matrix::Zero(C.rows(), C.cols());
  }

  bool all_finite() const { return A.allFinite() && B.allFinite() && C.allFinite(); }
};

/// Mode-n matricization: I x JK, J x IK or K x IJ.
inline Matrix unfold(const DenseTensor3& t, Mode mode) {
  const auto [I, J, K] = t.dims();
  Matrix m;
  switch (mode) {
    case Mode::First:
      m.resize(I, J * K);
      for (std::size_t k = 0; k < K; ++k)
        for (std::size_t j = 0; j < J; ++j)
          for (std::size_t i = 0; i < I; ++i) m(i, j + J * k) = t(i, j, k);
      break;
    case Mode::Second:
      m.resize(J, I * K);
      for (std::size_t k = 0; k < K; ++k)
        for (std::size_t j = 0; j < J; ++j)
          for (std::size_t i = 0; i < I; ++i) m(j, i + I * k) = t(i, j, k);
      break;
    case Mode::Third:
      m.resize(K, I * J);
      for (std::size_t k = 0; k < K; ++k)
        for (std::size_t j = 0; j < J; ++j)
          for (std::size_t i = 0; i < I; ++i) m(k, i + I * j) = t(i, j, k);
      break;
  }
  return m;
}

inline Matrix unfold(const DenseTensor3& t, int mode) { return unfold(t, to_mode(mode)); }

/// Inverse of unfold().
inline DenseTensor3 fold(const Matrix& m, Mode mode, Dims dims) {
  DenseTensor3 t(dims);
  const auto [I, J, K] = dims;
  const auto expect_rows = static_cast<Eigen::Index>(dims[mode]);
  const auto expect_cols = static_cast<Eigen::Index>(dims.size() / dims[mode]);
  if (m.rows() != expect_rows || m.cols() != expect_cols)
    throw InvalidArgument("matrix shape does not match the requested fold");
  for (std::size_t k = 0; k < K; ++k)
    for (std::size_t j = 0; j < J; ++j)
      for (std::size_t i = 0; i < I; ++i) {
        switch (mode) {
          case Mode::First: t(i, j, k) = m(i, j + J * k); break;
          case Mode::Second: t(i, j, k) = m(j, i + I * k); break;
          case Mode::Third: t(i, j, k) = m(k, i + I * j); break;
        }
      }
  return t;
}

/// Column-wise Kronecker product: row (p * m2.rows() + q) of column r is m1(p,r) * m2(q,r).
inline Matrix khatri_rao(const Matrix& m1, const Matrix& m2) {
  if (m1.cols() != m2.cols())
    throw InvalidArgument("khatri_rao: column counts differ (" + std::to_string(m1.cols()) + " vs " +
                          std::to_string(m2.cols()) + ")");
  Matrix out(m1.rows() * m2.rows(), m1.cols());
  for (Eigen::Index p = 0; p < m1.rows(); ++p)
    for (Eigen::Index q = 0; q < m2.rows(); ++q)
      out.row(p * m2.rows() + q) = m1.row(p).cwiseProduct(m2.row(q));
  return out;
}

/// Model value at one entry: sum_r A(i,r) B(j,r) C(k,r).
inline double model_entry(const FactorModel& f, std::size_t i, std::size_t j, std::size_t k) {
  const auto R = f.A.cols();
  const double* a = f.A.data() + i * R;
  const double* b = f.B.data() + j * R;
  const double* c = f.C.data() + k * R;
  double s = 0.0;
  for (Eigen::Index r = 0; r < R; ++r) s += a[r] * b[r] * c[r];
  return s;
}

inline DenseTensor3 reconstruct(const FactorModel& f) {
  const Dims dims = f.dims();
  DenseTensor3 t(dims);
  for (std::size_t k = 0; k < dims.K; ++k)
    for (std::size_t j = 0; j < dims.J; ++j)
      for (std::size_t i = 0; i < dims.I; ++i) t(i, j, k) = model_entry(f, i, j, k);
  return t;
}

inline void require_same_dims(const DenseTensor3& t, const FactorModel& f) {
  if (t.dims() != f.dims())
    throw InvalidArgument("tensor dims " + to_string(t.dims()) + " do not match factor dims " +
                          to_string(f.dims()));
}

/// Squared Frobenius norm of X - [[A, B, C]].
inline double loss(const DenseTensor3& t, const FactorModel& f) {
  require_same_dims(t, f);
  const Dims d = t.dims();
  double s = 0.0;
  for (std::size_t k = 0; k < d.K; ++k)
    for (std::size_t j = 0; j < d.J; ++j)
      for (std::size_t i = 0; i < d.I; ++i) {
        const double e = t(i, j, k) - model_entry(f, i, j, k);
        s += e * e;
      }
  return s;
}

inline double rmse(const DenseTensor3& t, const FactorModel& f) {
  return std::sqrt(loss(t, f) / static_cast<double>(t.size()));
}

}  // namespace fpcpd
