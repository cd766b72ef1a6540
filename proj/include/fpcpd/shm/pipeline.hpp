#pragma once

/**
 * @file pipeline.hpp
 * Damage detection and localization on a features x sensors x events tensor.
 *
 * Each bootstrap trial splits the healthy events into train/test, fits CP on
 * the training events and trains a one-class SVM on their temporal rows.
 * Every event (train or test) gets its temporal row c by least squares
 * against the fitted A, B. For localization an event also gets its own
 * location matrix B_e (least squares of the event slice on A diag(c)); the
 * localization scores are k-NN distances between the rows of B_e after
 * standardizing it against the training events (elementwise mean and
 * standard deviation).
 */

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "fpcpd/shm/localization.hpp"
#include "fpcpd/shm/ocsvm.hpp"
#include "fpcpd/solvers.hpp"

namespace fpcpd::shm {

inline const std::string kHealthyLabel = "healthy";

struct PipelineConfig {
  SolverConfig solver;
  SolverKind kind = SolverKind::FpCpd;
  std::size_t trials = 10;
  double train_fraction = 0.8;
  double nu = kDefaultNu;
  std::optional<double> sigma;  ///< kernel width; median heuristic when absent
  std::size_t neighbors = kDefaultNeighbors;
  std::uint64_t seed = 1;       ///< bootstrap split seed

  void validate() const {
    solver.validate();
    if (trials < 1) throw InvalidArgument("trials must be >= 1");
    if (!(train_fraction > 0.0 && train_fraction < 1.0)) throw InvalidArgument("train_fraction must lie in (0, 1)");
    if (!(nu > 0.0 && nu < 1.0)) throw InvalidArgument("nu must lie in (0, 1)");
    if (sigma && !(*sigma > 0.0)) throw InvalidArgument("sigma must be positive");
    if (neighbors < 1) throw InvalidArgument("neighbors must be >= 1");
  }
};

/// One scored test event in one trial.
struct EventDecision {
  std::size_t trial = 0;
  std::size_t event = 0;    ///< index into the event axis
  double decision = 0.0;
  bool flagged = false;     ///< decision < 0, i.e. predicted damage
  std::size_t top_sensor = 0;
  Eigen::VectorXd localization;
};

struct TrialResult {
  std::size_t tp = 0, fp = 0, fn = 0, tn = 0;
  double f_score = 0.0;
  std::size_t train_events = 0;
  double fit_rmse = 0.0;
  std::size_t fit_epochs = 0;
  bool sigma_floored = false;
};

struct PipelineReport {
  std::vector<TrialResult> trials;
  std::vector<EventDecision> decisions;
  double f_mean = 0.0;
  double f_std = 0.0;  ///< sample standard deviation over trials (0 for one trial)
  std::map<std::string, double> mean_decision;  ///< per label, over all scored rows
  /// Share of scored damage rows whose top sensor is the known damaged sensor (when known).
  std::optional<double> localization_accuracy;
};

/// Least-squares temporal rows for every event of @p t given fixed A, B.
inline Matrix project_events(const DenseTensor3& t, const Matrix& A, const Matrix& B) {
  const FactorModel f(A, B, Matrix::Zero(static_cast<Eigen::Index>(t.dims().K), A.cols()));
  return solve_gram(gram_hadamard(f, Mode::Third), mttkrp(t, f, Mode::Third));
}

/// Location matrix (sensors x R) fitted to the slice of event @p e with A and temporal row @p c fixed.
inline Matrix event_location(const DenseTensor3& t, std::size_t e, const Matrix& A, const Eigen::RowVectorXd& c) {
  const Dims d = t.dims();
  const Matrix M = A * c.asDiagonal();
  Matrix slice(d.J, d.I);  // X_e^T
  for (std::size_t s = 0; s < d.J; ++s)
    for (std::size_t m = 0; m < d.I; ++m) slice(s, m) = t(m, s, e);
  return solve_gram(M.transpose() * M, slice * M);
}

/// Elementwise mean and spread of the training events' location matrices.
struct LocationBaseline {
  Matrix mean;
  Matrix spread;

  /// Standardized deviation of an event's location matrix.
  Matrix deviation(const Matrix& location) const { return (location - mean).cwiseQuotient(spread); }
};

inline LocationBaseline location_baseline(const DenseTensor3& train, const Matrix& A, const Matrix& rows) {
  const std::size_t T = train.dims().K;
  std::vector<Matrix> locs;
  locs.reserve(T);
  for (std::size_t n = 0; n < T; ++n) locs.push_back(event_location(train, n, A, rows.row(static_cast<Eigen::Index>(n))));
  LocationBaseline b{Matrix::Zero(locs[0].rows(), locs[0].cols()), Matrix::Zero(locs[0].rows(), locs[0].cols())};
  for (const Matrix& l : locs) b.mean += l;
  b.mean /= static_cast<double>(T);
  for (const Matrix& l : locs) b.spread += (l - b.mean).cwiseAbs2();
  b.spread = (b.spread / static_cast<double>(T)).cwiseSqrt();
  // Floor at a small share of the typical spread so constant entries do not blow up.
  const double floor = 1e-3 * std::max(b.spread.mean(), 1e-12);
  b.spread = b.spread.cwiseMax(floor);
  return b;
}

inline DenseTensor3 select_events(const DenseTensor3& t, const std::vector<std::size_t>& events) {
  const Dims d = t.dims();
  DenseTensor3 out({d.I, d.J, events.size()});
  for (std::size_t n = 0; n < events.size(); ++n)
    for (std::size_t s = 0; s < d.J; ++s)
      for (std::size_t m = 0; m < d.I; ++m) out(m, s, n) = t(m, s, events[n]);
  return out;
}

/**
 * Runs the bootstrap protocol. labels[e] == "healthy" marks healthy events,
 * anything else is damage (positive class). damaged_sensor, when given, holds
 * the true sensor of each damage event and enables localization_accuracy.
 */
inline PipelineReport evaluate_pipeline(const DenseTensor3& t, const std::vector<std::string>& labels,
                                        const PipelineConfig& cfg,
                                        const std::vector<std::optional<std::size_t>>& damaged_sensor = {}) {
  cfg.validate();
  const Dims d = t.dims();
  if (labels.size() != d.K)
    throw InvalidArgument(std::to_string(labels.size()) + " labels for " + std::to_string(d.K) + " events");
  if (!damaged_sensor.empty() && damaged_sensor.size() != d.K)
    throw InvalidArgument("damaged_sensor must be empty or have one entry per event");
  if (cfg.neighbors >= d.J) throw InvalidArgument("neighbors must be smaller than the sensor count");

  std::vector<std::size_t> healthy, damage;
  for (std::size_t e = 0; e < d.K; ++e) (labels[e] == kHealthyLabel ? healthy : damage).push_back(e);
  if (damage.empty()) throw InvalidArgument("no damage events (every label is '" + kHealthyLabel + "')");
  if (healthy.size() < 3) throw InvalidArgument("need at least 3 healthy events, got " + std::to_string(healthy.size()));

  auto n_train = static_cast<std::size_t>(std::lround(cfg.train_fraction * static_cast<double>(healthy.size())));
  n_train = std::clamp<std::size_t>(n_train, 2, healthy.size() - 1);

  PipelineReport report;
  std::size_t located = 0, locatable = 0;
  std::map<std::string, std::pair<double, std::size_t>> by_label;

  for (std::size_t trial = 0; trial < cfg.trials; ++trial) {
    std::mt19937_64 rng(detail::splitmix64(cfg.seed) + trial);
    std::vector<std::size_t> order = healthy;
    std::shuffle(order.begin(), order.end(), rng);
    const std::vector<std::size_t> train(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_train));
    std::vector<std::size_t> test(order.begin() + static_cast<std::ptrdiff_t>(n_train), order.end());
    test.insert(test.end(), damage.begin(), damage.end());

    const DenseTensor3 train_t = select_events(t, train);
    SolverConfig scfg = cfg.solver;
    scfg.seed = cfg.solver.seed + trial;
    const FitResult fitted = fit(cfg.kind, train_t, scfg);
    const Matrix& A = fitted.model.A;
    const Matrix& B = fitted.model.B;

    const Matrix train_rows = project_events(train_t, A, B);
    const OcsvmModel svm = ocsvm_train(train_rows, cfg.nu, cfg.sigma);

    const LocationBaseline baseline = location_baseline(train_t, A, train_rows);

    const DenseTensor3 test_t = select_events(t, test);
    const Matrix test_rows = project_events(test_t, A, B);

    TrialResult tr;
    tr.train_events = train.size();
    tr.fit_rmse = fitted.trace.empty() ? rmse(train_t, fitted.model) : fitted.trace.back().rmse;
    tr.fit_epochs = fitted.trace.size();
    tr.sigma_floored = svm.sigma_floored;
    for (std::size_t n = 0; n < test.size(); ++n) {
      const Eigen::RowVectorXd c = test_rows.row(static_cast<Eigen::Index>(n));
      EventDecision row;
      row.trial = trial;
      row.event = test[n];
      row.decision = svm.decision(c);
      row.flagged = row.decision < 0.0;
      row.localization = localization_scores(baseline.deviation(event_location(test_t, n, A, c)), cfg.neighbors);
      Eigen::Index top = 0;
      row.localization.maxCoeff(&top);
      row.top_sensor = static_cast<std::size_t>(top);

      const bool is_damage = labels[row.event] != kHealthyLabel;
      if (is_damage) (row.flagged ? tr.tp : tr.fn)++;
      else (row.flagged ? tr.fp : tr.tn)++;
      if (is_damage && !damaged_sensor.empty() && damaged_sensor[row.event]) {
        ++locatable;
        if (row.top_sensor == *damaged_sensor[row.event]) ++located;
      }
      auto& acc = by_label[labels[row.event]];
      acc.first += row.decision;
      acc.second += 1;
      report.decisions.push_back(std::move(row));
    }
    tr.f_score = f_score(tr.tp, tr.fp, tr.fn);
    report.trials.push_back(tr);
  }

  double sum = 0.0;
  for (const auto& tr : report.trials) sum += tr.f_score;
  report.f_mean = sum / static_cast<double>(report.trials.size());
  if (report.trials.size() > 1) {
    double ss = 0.0;
    for (const auto& tr : report.trials) ss += (tr.f_score - report.f_mean) * (tr.f_score - report.f_mean);
    report.f_std = std::sqrt(ss / static_cast<double>(report.trials.size() - 1));
  }
  for (const auto& [label, acc] : by_label) report.mean_decision[label] = acc.first / static_cast<double>(acc.second);
  if (locatable > 0) report.localization_accuracy = static_cast<double>(located) / static_cast<double>(locatable);
  return report;
}

}  // namespace fpcpd::shm
