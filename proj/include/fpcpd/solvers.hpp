#pragma once

// Uniform entry point over the five CP solvers.

#include <string>

#include "fpcpd/als.hpp"
#include "fpcpd/sals.hpp"
#include "fpcpd/sgd.hpp"

namespace fpcpd {

enum class SolverKind { FpCpd, Psgd, Sgd, Sals, Als };

inline const char* to_string(SolverKind k) {
  switch (k) {
    case SolverKind::FpCpd: return "fpcpd";
    case SolverKind::Psgd: return "psgd";
    case SolverKind::Sgd: return "sgd";
    case SolverKind::Sals: return "sals";
    case SolverKind::Als: return "als";
  }
  return "?";
}

inline SolverKind parse_solver(const std::string& s) {
  for (SolverKind k : {SolverKind::FpCpd, SolverKind::Psgd, SolverKind::Sgd, SolverKind::Sals, SolverKind::Als})
    if (s == to_string(k)) return k;
  throw InvalidArgument("unknown solver '" + s + "' (expected fpcpd, psgd, sgd, sals or als)");
}

/// Runs one solver from @p init. @p plan is only used by the stochastic solvers.
inline FitResult fit(SolverKind kind, const DenseTensor3& t, const SolverConfig& cfg, const BlockPlan& plan,
                     FactorModel init) {
  switch (kind) {
    case SolverKind::FpCpd: return fpcpd_fit(t, cfg, plan, std::move(init));
    case SolverKind::Psgd: return psgd_fit(t, cfg, plan, std::move(init));
    case SolverKind::Sgd: return sgd_fit(t, cfg, plan, std::move(init));
    case SolverKind::Sals: return sals_fit(t, cfg, std::move(init));
    case SolverKind::Als: return als_fit(t, cfg, std::move(init));
  }
  throw InvalidArgument("unknown solver");
}

inline FitResult fit(SolverKind kind, const DenseTensor3& t, const SolverConfig& cfg) {
  cfg.validate();
  return fit(kind, t, cfg, build_plan(t.dims()), initial_factors(t, cfg));
}

}  // namespace fpcpd
