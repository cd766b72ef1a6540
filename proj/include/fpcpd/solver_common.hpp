#pragma once

// Pieces shared by the CP solvers: initialization, stopping rule,
// divergence guard, wall-clock trace bookkeeping and the normal-equation solve.

#include <chrono>
#include <cstdint>
#include <cmath>
#include <deque>
#include <random>
#include <string>

#include "fpcpd/solver_config.hpp"
#include "fpcpd/tensor.hpp"

namespace fpcpd {

/// Raised by the stochastic solvers when the loss blows up.
class DivergenceError : public Error {
public:
  DivergenceError(std::size_t epoch, double learning_rate, double loss_value)
      : Error("diverged at epoch " + std::to_string(epoch) + " (learning rate " + std::to_string(learning_rate) +
              ", loss " + std::to_string(loss_value) + ")"),
        epoch_(epoch),
        learning_rate_(learning_rate),
        loss_(loss_value) {}

  std::size_t epoch() const { return epoch_; }
  double learning_rate() const { return learning_rate_; }
  double loss() const { return loss_; }

private:
  std::size_t epoch_;
  double learning_rate_;
  double loss_;
};

struct FitResult {
  FactorModel model;
  Trace trace;
};

/// Loss may not exceed this multiple of the reference loss.
inline constexpr double kDivergenceFactor = 1e3;
/// Relative change must stay below tol for this many consecutive epochs.
inline constexpr std::size_t kStopWindow = 3;

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace detail

/// Factor entries i.i.d. uniform on [0, 1), filled A, B, C in row-major order.
inline FactorModel random_factors(Dims dims, std::size_t rank, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  FactorModel f(dims, rank);
  for (Matrix* m : {&f.A, &f.B, &f.C})
    for (Eigen::Index n = 0; n < m->size(); ++n) m->data()[n] = unif(rng);
  return f;
}

class ConvergenceMonitor {
public:
  ConvergenceMonitor(double tol, std::size_t window = kStopWindow) : tol_(tol), window_(window) {}

  /// Records a new loss value; returns true once the stopping rule fires.
  bool update(double loss_value) {
    if (has_prev_) {
      const double denom = std::max(std::abs(prev_), std::abs(loss_value));
      const double rel = denom == 0.0 ? 0.0 : std::abs(prev_ - loss_value) / denom;
      streak_ = rel < tol_ ? streak_ + 1 : 0;
    }
    prev_ = loss_value;
    has_prev_ = true;
    return streak_ >= window_ || loss_value == 0.0;
  }

private:
  double tol_;
  std::size_t window_;
  double prev_ = 0.0;
  bool has_prev_ = false;
  std::size_t streak_ = 0;
};

class Stopwatch {
public:
  Stopwatch() : start_(std::chrono::steady_clock::now()) {}
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

private:
  std::chrono::steady_clock::time_point start_;
};

inline TraceRecord make_record(std::size_t epoch, double seconds, double loss_value, std::size_t entries) {
  return {epoch, seconds, std::sqrt(loss_value / static_cast<double>(entries)), loss_value};
}

/**
 * Solves X * gram = rhs for X (gram symmetric PSD, R x R) with ridge damping
 * 1e-12 * trace(gram) / R on the diagonal. A zero Gram matrix yields zero.
 */
inline Matrix solve_gram(const Matrix& gram, const Matrix& rhs) {
  const double tr = gram.trace();
  if (!(tr > 0.0)) return Matrix::Zero(rhs.rows(), rhs.cols());
  Eigen::MatrixXd damped = gram;
  damped.diagonal().array() += 1e-12 * tr / static_cast<double>(gram.rows());
  Eigen::LDLT<Eigen::MatrixXd> ldlt(damped);
  Eigen::MatrixXd rhs_t = rhs.transpose();
  return ldlt.solve(rhs_t).transpose();
}

}  // namespace fpcpd
