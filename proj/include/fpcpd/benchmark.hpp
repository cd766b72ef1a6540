#pragma once

// Solver benchmark: every solver sees the same tensor and the same initial
// factors; wall clock covers the fit call only (plan construction and
// initialization are done beforehand).

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "fpcpd/solvers.hpp"
#include "fpcpd/synthetic.hpp"

namespace fpcpd {

struct BenchmarkRun {
  SolverKind solver = SolverKind::FpCpd;
  std::uint64_t data_seed = 0;
  SolverConfig config;
  Trace trace;
  double final_rmse = std::numeric_limits<double>::quiet_NaN();
  double seconds = 0.0;
  std::optional<std::size_t> epochs_to_target;
  std::string error;  ///< non-empty when the solver failed (e.g. diverged)

  bool ok() const { return error.empty(); }
};

/// First epoch whose rmse is at or below @p target.
inline std::optional<std::size_t> epochs_to_target(const Trace& trace, double target) {
  for (const auto& r : trace)
    if (r.rmse <= target) return r.epoch;
  return std::nullopt;
}

/// Runs each solver on @p t from the same initial factors. Failures are recorded, not thrown.
inline std::vector<BenchmarkRun> run_benchmark(const DenseTensor3& t, const std::vector<SolverKind>& solvers,
                                               const SolverConfig& cfg, double target_rmse,
                                               std::uint64_t data_seed = 0) {
  cfg.validate();
  const BlockPlan plan = build_plan(t.dims());
  const FactorModel init = initial_factors(t, cfg);
  std::vector<BenchmarkRun> runs;
  for (SolverKind kind : solvers) {
    BenchmarkRun run;
    run.solver = kind;
    run.data_seed = data_seed;
    run.config = cfg;
    Stopwatch clock;
    try {
      FitResult res = fit(kind, t, cfg, plan, init);
      run.seconds = clock.seconds();
      run.trace = std::move(res.trace);
      run.final_rmse = run.trace.empty() ? rmse(t, res.model) : run.trace.back().rmse;
      run.epochs_to_target = epochs_to_target(run.trace, target_rmse);
    } catch (const Error& e) {
      run.seconds = clock.seconds();
      run.error = e.what();
    }
    runs.push_back(std::move(run));
  }
  return runs;
}

/// The synthetic benchmark: `seeds` datasets, each fitted by every solver.
struct BenchmarkSpec {
  SyntheticSpec data{{30, 30, 30}, 5, 0.01, 1};
  std::size_t seeds = 10;
  std::vector<SolverKind> solvers{SolverKind::FpCpd, SolverKind::Psgd, SolverKind::Sgd, SolverKind::Sals,
                                  SolverKind::Als};
  SolverConfig solver;
  double target_rmse = 0.02;

  void validate() const {
    data.validate();
    solver.validate();
    if (seeds < 1) throw InvalidArgument("seeds must be >= 1");
    if (solvers.empty()) throw InvalidArgument("no solvers selected");
    if (!(target_rmse > 0.0)) throw InvalidArgument("target_rmse must be positive");
  }
};

inline std::vector<SolverKind> parse_solver_list(const std::string& s) {
  std::vector<SolverKind> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = detail::trim(item);
    if (!item.empty()) out.push_back(parse_solver(item));
  }
  if (out.empty()) throw InvalidArgument("empty solver list");
  return out;
}

/// Benchmark keys (dims, true_rank, data_noise, data_seed, seeds, solvers, target_rmse); others go to the solver config.
inline void set_benchmark_value(BenchmarkSpec& spec, const std::string& key, const std::string& value) {
  using detail::parse_number;
  if (key == "dims") spec.data.dims = parse_dims(value);
  else if (key == "true_rank") spec.data.rank = parse_number<std::size_t>(key, value);
  else if (key == "data_noise") spec.data.noise_std = parse_number<double>(key, value);
  else if (key == "data_seed") spec.data.seed = parse_number<std::uint64_t>(key, value);
  else if (key == "seeds") spec.seeds = parse_number<std::size_t>(key, value);
  else if (key == "solvers") spec.solvers = parse_solver_list(value);
  else if (key == "target_rmse") spec.target_rmse = parse_number<double>(key, value);
  else set_config_value(spec.solver, key, value);
}

inline BenchmarkSpec read_benchmark_spec(std::istream& is, BenchmarkSpec base = {}) {
  for (const auto& [k, v] : read_key_values(is)) set_benchmark_value(base, k, v);
  base.validate();
  return base;
}

inline BenchmarkSpec load_benchmark_spec(const std::string& path, BenchmarkSpec base = {}) {
  std::ifstream is(path);
  if (!is) throw Error("cannot open benchmark config " + path);
  return read_benchmark_spec(is, base);
}

/// Dataset n (0-based) uses data seed data.seed + n and solver seed solver.seed + n.
inline std::vector<BenchmarkRun> run_benchmark_suite(const BenchmarkSpec& spec) {
  spec.validate();
  std::vector<BenchmarkRun> all;
  for (std::size_t n = 0; n < spec.seeds; ++n) {
    SyntheticSpec data = spec.data;
    data.seed = spec.data.seed + n;
    const DenseTensor3 t = generate_synthetic(data).tensor;
    SolverConfig cfg = spec.solver;
    cfg.seed = spec.solver.seed + n;
    auto runs = run_benchmark(t, spec.solvers, cfg, spec.target_rmse, data.seed);
    all.insert(all.end(), std::make_move_iterator(runs.begin()), std::make_move_iterator(runs.end()));
  }
  return all;
}

/// Median epochs-to-target of one solver; runs that never reach the target (or fail) count as +infinity.
inline double median_epochs_to_target(const std::vector<BenchmarkRun>& runs, SolverKind kind) {
  std::vector<double> v;
  for (const auto& r : runs)
    if (r.solver == kind)
      v.push_back(r.ok() && r.epochs_to_target ? static_cast<double>(*r.epochs_to_target)
                                               : std::numeric_limits<double>::infinity());
  if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::sort(v.begin(), v.end());
  const std::size_t m = v.size() / 2;
  return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

}  // namespace fpcpd
