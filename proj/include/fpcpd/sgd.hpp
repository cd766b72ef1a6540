#pragma once

/**
 * @file sgd.hpp
 * Block-parallel stochastic gradient CP solvers.
 *
 * One epoch walks the blocks of a BlockPlan in order; the entries of a block
 * are interchangeable and are applied concurrently by a BlockExecutor. For
 * entry (i,j,k) with momentum friction g and step eta the update is
 *
 *   lookahead  a' = A_i + eta*g*vA_i   (likewise b', c'; a' = A_i when the
 *                                       lookahead is disabled)
 *   residual   e  = X_ijk - sum_r a'_r b'_r c'_r
 *   direction  dA = e * (b' .* c')     (likewise dB, dC)
 *   velocity   vA_i = g*vA_i + (1-g)*dA
 *   step       A_i += eta * (vA_i + eps - beta*sign(A_i)),  eps ~ N(0, noise^2)
 *
 * fpcpd_fit uses the configuration as given. psgd_fit forces g = 0 (plain
 * perturbed SGD), sgd_fit additionally forces noise = 0.
 *
 * Perturbation draws come from a counter-based generator keyed on
 * (seed, epoch, entry), so they do not depend on which thread applies the
 * entry.
 */

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "fpcpd/block_executor.hpp"
#include "fpcpd/block_plan.hpp"
#include "fpcpd/init.hpp"
#include "fpcpd/solver_common.hpp"

namespace fpcpd {

namespace detail {

/// Standard normal draws for one entry update, reproducible from a key.
class NoiseStream {
public:
  explicit NoiseStream(std::uint64_t key) : state_(splitmix64(key)) {}

  double next() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    // Marsaglia polar method on 53-bit uniforms in [-1, 1).
    double u, v, s;
    do {
      u = static_cast<double>(draw() >> 11) * 0x1.0p-52 - 1.0;
      v = static_cast<double>(draw() >> 11) * 0x1.0p-52 - 1.0;
      s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    const double scale = std::sqrt(-2.0 * std::log(s) / s);
    spare_ = v * scale;
    has_spare_ = true;
    return u * scale;
  }

private:
  std::uint64_t draw() { return splitmix64(state_ += 0x9e3779b97f4a7c15ULL); }

  std::uint64_t state_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

inline std::uint64_t noise_key(std::uint64_t seed, std::size_t epoch, std::size_t linear_index) {
  return splitmix64(splitmix64(seed ^ 0x6a09e667f3bcc909ULL) + epoch) ^ splitmix64(linear_index);
}

inline double sign(double v) { return static_cast<double>((v > 0.0) - (v < 0.0)); }

}  // namespace detail

/// Per-step constants of one epoch.
struct StepParams {
  double eta = 0.0;
  double gamma = 0.0;
  double noise = 0.0;
  double beta = 0.0;
  bool lookahead = true;
  std::uint64_t seed = 0;
  std::size_t epoch = 0;
};

/**
 * Applies the accelerated, perturbed update for a single entry. Touches only
 * row e.i of A/velA, row e.j of B/velB and row e.k of C/velC.
 */
inline void update_entry(const DenseTensor3& t, FactorModel& f, const Entry& e, const StepParams& s) {
  const Eigen::Index R = f.A.cols();
  double* a = f.A.data() + e.i * R;
  double* b = f.B.data() + e.j * R;
  double* c = f.C.data() + e.k * R;
  double* va = f.velA.data() + e.i * R;
  double* vb = f.velB.data() + e.j * R;
  double* vc = f.velC.data() + e.k * R;
  const double ahead = s.lookahead ? s.eta * s.gamma : 0.0;

  double pred = 0.0;
  for (Eigen::Index r = 0; r < R; ++r)
    pred += (a[r] + ahead * va[r]) * (b[r] + ahead * vb[r]) * (c[r] + ahead * vc[r]);
  const double res = t(e.i, e.j, e.k) - pred;

  const bool perturb = s.noise > 0.0;
  detail::NoiseStream noise(perturb ? detail::noise_key(s.seed, s.epoch, t.index(e.i, e.j, e.k)) : 0);
  const double keep = s.gamma, blend = 1.0 - s.gamma;

  for (Eigen::Index r = 0; r < R; ++r) {
    const double ar = a[r] + ahead * va[r];
    const double br = b[r] + ahead * vb[r];
    const double cr = c[r] + ahead * vc[r];
    va[r] = keep * va[r] + blend * (res * br * cr);
    vb[r] = keep * vb[r] + blend * (res * ar * cr);
    vc[r] = keep * vc[r] + blend * (res * ar * br);
    double da = va[r], db = vb[r], dc = vc[r];
    if (perturb) {
      da += s.noise * noise.next();
      db += s.noise * noise.next();
      dc += s.noise * noise.next();
    }
    if (s.beta > 0.0) {
      da -= s.beta * detail::sign(a[r]);
      db -= s.beta * detail::sign(b[r]);
      dc -= s.beta * detail::sign(c[r]);
    }
    a[r] += s.eta * da;
    b[r] += s.eta * db;
    c[r] += s.eta * dc;
  }
}

enum class StochasticVariant { FpCpd, Psgd, Sgd };

inline const char* to_string(StochasticVariant v) {
  switch (v) {
    case StochasticVariant::FpCpd: return "fpcpd";
    case StochasticVariant::Psgd: return "psgd";
    case StochasticVariant::Sgd: return "sgd";
  }
  return "?";
}

/**
 * Shared epoch loop. With cfg.deterministic the blocks are visited in plan
 * order and entries are split statically; otherwise the block order is
 * reshuffled every epoch (seeded) and workers claim entries dynamically.
 */
inline FitResult stochastic_fit(const DenseTensor3& t, const SolverConfig& cfg, const BlockPlan& plan,
                                StochasticVariant variant, FactorModel init) {
  cfg.validate();
  require_same_dims(t, init);
  if (plan.dims() != t.dims()) throw InvalidArgument("block plan was built for different dims");

  StepParams step;
  step.gamma = variant == StochasticVariant::FpCpd ? cfg.gamma : 0.0;
  step.noise = variant == StochasticVariant::Sgd ? 0.0 : cfg.noise;
  step.beta = cfg.beta;
  step.lookahead = cfg.nag_lookahead;
  step.seed = cfg.seed;

  FitResult res{std::move(init), {}};
  FactorModel& f = res.model;
  f.reset_velocity();

  BlockExecutor executor(cfg.threads, cfg.deterministic ? Schedule::Static : Schedule::Dynamic);
  std::vector<std::size_t> order(plan.block_count());
  for (std::size_t b = 0; b < order.size(); ++b) order[b] = b;
  std::mt19937_64 shuffle_rng(cfg.seed ^ 0xb7e151628aed2a6bULL);

  Stopwatch clock;
  const double reference = std::max(loss(t, f), t.squared_norm());
  ConvergenceMonitor monitor(cfg.tol);

  for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
    step.eta = cfg.learning_rate(epoch - 1);
    step.epoch = epoch;
    if (!cfg.deterministic) std::shuffle(order.begin(), order.end(), shuffle_rng);

    const auto apply = [&](const Entry& e) { update_entry(t, f, e, step); };
    for (std::size_t b : order) run_block_parallel(executor, plan.block(b), apply);

    const double l = loss(t, f);
    if (!std::isfinite(l) || !f.all_finite() || (reference > 0.0 && l > kDivergenceFactor * reference))
      throw DivergenceError(epoch, step.eta, l);
    res.trace.push_back(make_record(epoch, clock.seconds(), l, t.size()));
    if (monitor.update(l)) break;
  }
  return res;
}

inline FitResult fpcpd_fit(const DenseTensor3& t, const SolverConfig& cfg, const BlockPlan& plan, FactorModel init) {
  return stochastic_fit(t, cfg, plan, StochasticVariant::FpCpd, std::move(init));
}

inline FitResult fpcpd_fit(const DenseTensor3& t, const SolverConfig& cfg, const BlockPlan& plan) {
  cfg.validate();
  return fpcpd_fit(t, cfg, plan, initial_factors(t, cfg));
}

inline FitResult psgd_fit(const DenseTensor3& t, const SolverConfig& cfg, const BlockPlan& plan, FactorModel init) {
  return stochastic_fit(t, cfg, plan, StochasticVariant::Psgd, std::move(init));
}

inline FitResult psgd_fit(const DenseTensor3& t, const SolverConfig& cfg, const BlockPlan& plan) {
  cfg.validate();
  return psgd_fit(t, cfg, plan, initial_factors(t, cfg));
}

inline FitResult sgd_fit(const DenseTensor3& t, const SolverConfig& cfg, const BlockPlan& plan, FactorModel init) {
  return stochastic_fit(t, cfg, plan, StochasticVariant::Sgd, std::move(init));
}

inline FitResult sgd_fit(const DenseTensor3& t, const SolverConfig& cfg, const BlockPlan& plan) {
  cfg.validate();
  return sgd_fit(t, cfg, plan, initial_factors(t, cfg));
}

}  // namespace fpcpd
