#pragma once

// JSON documents emitted by the command-line tool. Requires nlohmann/json
// (vendor/json.hpp) on the include path; see README for the schemas.

#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "json.hpp"

#include "fpcpd/benchmark.hpp"
#include "fpcpd/block_plan.hpp"
#include "fpcpd/corcondia.hpp"
#include "fpcpd/shm/pipeline.hpp"

namespace fpcpd {

using json = nlohmann::ordered_json;

inline json dims_json(Dims d) { return json::array({d.I, d.J, d.K}); }

/// Finite numbers as numbers, anything else as null.
inline json number_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

inline json to_json(const SolverConfig& c) {
  return {{"rank", c.rank},
          {"eta", c.eta},
          {"eta_decay", c.eta_decay},
          {"gamma", c.gamma},
          {"noise", c.noise},
          {"beta", c.beta},
          {"epochs", c.epochs},
          {"tol", c.tol},
          {"seed", c.seed},
          {"threads", c.threads},
          {"deterministic", c.deterministic},
          {"nag_lookahead", c.nag_lookahead},
          {"batch_fraction", c.batch_fraction},
          {"init", to_string(c.init)}};
}

inline SolverConfig solver_config_from_json(const json& j) {
  SolverConfig c;
  c.rank = j.at("rank").get<std::size_t>();
  c.eta = j.at("eta").get<double>();
  c.eta_decay = j.at("eta_decay").get<double>();
  c.gamma = j.at("gamma").get<double>();
  c.noise = j.at("noise").get<double>();
  c.beta = j.at("beta").get<double>();
  c.epochs = j.at("epochs").get<std::size_t>();
  c.tol = j.at("tol").get<double>();
  c.seed = j.at("seed").get<std::uint64_t>();
  c.threads = j.at("threads").get<std::size_t>();
  c.deterministic = j.at("deterministic").get<bool>();
  c.nag_lookahead = j.at("nag_lookahead").get<bool>();
  c.batch_fraction = j.at("batch_fraction").get<double>();
  c.init = parse_init_method(j.at("init").get<std::string>());
  c.validate();
  return c;
}

/// One benchmark run; @p trace_csv is the file its trace was written to (may be empty).
inline json to_json(const BenchmarkRun& r, const std::string& trace_csv = {}) {
  json j{{"solver", to_string(r.solver)},
         {"data_seed", r.data_seed},
         {"threads", r.config.threads},
         {"config", to_json(r.config)},
         {"epochs", r.trace.size()},
         {"final_rmse", number_or_null(r.final_rmse)},
         {"seconds", r.seconds},
         {"epochs_to_target", r.epochs_to_target ? json(*r.epochs_to_target) : json(nullptr)},
         {"error", r.ok() ? json(nullptr) : json(r.error)}};
  if (!trace_csv.empty()) j["trace_csv"] = trace_csv;
  return j;
}

inline json benchmark_summary_json(const std::vector<BenchmarkRun>& runs, double target_rmse,
                                   const std::vector<std::string>& trace_files = {}, const json& dataset = nullptr) {
  json j{{"schema", "fpcpd.benchmark.v1"}, {"dataset", dataset}, {"target_rmse", target_rmse}};
  json arr = json::array();
  for (std::size_t n = 0; n < runs.size(); ++n)
    arr.push_back(to_json(runs[n], n < trace_files.size() ? trace_files[n] : std::string()));
  j["runs"] = std::move(arr);
  json med = json::object();
  for (const auto& r : runs) {
    const char* name = to_string(r.solver);
    if (!med.contains(name)) med[name] = number_or_null(median_epochs_to_target(runs, r.solver));
  }
  j["median_epochs_to_target"] = std::move(med);
  return j;
}

inline json dataset_json(const BenchmarkSpec& spec) {
  return {{"dims", dims_json(spec.data.dims)},
          {"true_rank", spec.data.rank},
          {"data_noise", spec.data.noise_std},
          {"data_seed", spec.data.seed},
          {"seeds", spec.seeds}};
}

/// Plan with its blocks; with include_entries == false only the shape is emitted.
inline json plan_json(const BlockPlan& plan, bool include_entries = true) {
  json j{{"schema", "fpcpd.plan.v1"},
         {"dims", dims_json(plan.dims())},
         {"parallelism", plan.parallelism()},
         {"block_count", plan.block_count()},
         {"entry_count", plan.entry_count()}};
  if (include_entries) {
    json blocks = json::array();
    for (std::size_t b = 0; b < plan.block_count(); ++b) {
      json block = json::array();
      for (const Entry& e : plan.block(b)) block.push_back({e.i, e.j, e.k});
      blocks.push_back(std::move(block));
    }
    j["blocks"] = std::move(blocks);
  }
  return j;
}

namespace shm {

inline json pipeline_config_json(const PipelineConfig& c) {
  return {{"solver", to_string(c.kind)},
          {"trials", c.trials},
          {"train_fraction", c.train_fraction},
          {"nu", c.nu},
          {"sigma", c.sigma ? json(*c.sigma) : json("auto")},
          {"neighbors", c.neighbors},
          {"bootstrap_seed", c.seed},
          {"solver_config", to_json(c.solver)}};
}

inline json report_json(const PipelineReport& r, const PipelineConfig& cfg, Dims tensor_dims,
                        const std::vector<std::string>& ids, const std::vector<DegenerateSignal>& degenerate = {}) {
  json trials = json::array();
  for (const auto& t : r.trials)
    trials.push_back({{"f_score", t.f_score},
                      {"tp", t.tp},
                      {"fp", t.fp},
                      {"fn", t.fn},
                      {"tn", t.tn},
                      {"train_events", t.train_events},
                      {"fit_rmse", number_or_null(t.fit_rmse)},
                      {"fit_epochs", t.fit_epochs},
                      {"sigma_floored", t.sigma_floored}});
  json deg = json::array();
  for (const auto& d : degenerate) deg.push_back({{"sensor", d.sensor}, {"event_id", ids.at(d.event)}});
  json mean = json::object();
  for (const auto& [label, v] : r.mean_decision) mean[label] = v;
  return {{"schema", "fpcpd.pipeline.v1"},
          {"tensor_dims", dims_json(tensor_dims)},
          {"config", pipeline_config_json(cfg)},
          {"f_score", {{"mean", r.f_mean}, {"std", r.f_std}}},
          {"trials", std::move(trials)},
          {"mean_decision", std::move(mean)},
          {"localization_accuracy", r.localization_accuracy ? json(*r.localization_accuracy) : json(nullptr)},
          {"scored_rows", r.decisions.size()},
          {"degenerate_signals", std::move(deg)}};
}

}  // namespace shm

}  // namespace fpcpd
