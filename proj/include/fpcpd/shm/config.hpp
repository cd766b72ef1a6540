#pragma once

// Key-value configuration for the SHM pipeline and its synthetic benchmark.
// One file may carry generator keys, pipeline keys and solver keys together.

#include <algorithm>
#include <fstream>
#include <sstream>
#include <string>

#include "fpcpd/shm/pipeline.hpp"
#include "fpcpd/synthetic.hpp"

namespace fpcpd::shm {

struct ShmBenchmarkSpec {
  ShmSpec events = standard_shm_spec();
  PipelineConfig pipeline;
  std::size_t keep_bins = 128;

  void validate() const {
    events.validate();
    pipeline.validate();
    if (keep_bins < 1) throw InvalidArgument("keep_bins must be >= 1");
  }
};

namespace detail {

inline std::vector<double> parse_list(const std::string& key, const std::string& value) {
  std::vector<double> out;
  std::stringstream ss(value);
  std::string item;
  while (std::getline(ss, item, ','))
    out.push_back(fpcpd::detail::parse_number<double>(key, fpcpd::detail::trim(item)));
  return out;
}

/// "first count sensor magnitude"
inline AnomalySpec parse_anomaly(const std::string& key, const std::string& label, const std::string& value) {
  std::istringstream ss(value);
  AnomalySpec a;
  a.label = label;
  if (!(ss >> a.first >> a.count >> a.sensor >> a.magnitude) || !(ss >> std::ws).eof() ||
      value.find('-') != std::string::npos)
    throw InvalidArgument("config key '" + key + "': expected 'first count sensor magnitude', got '" + value + "'");
  return a;
}

}  // namespace detail

/// Pipeline keys; returns false when @p key is not one of them.
inline bool set_pipeline_value(PipelineConfig& cfg, const std::string& key, const std::string& value) {
  using fpcpd::detail::parse_number;
  if (key == "solver") cfg.kind = parse_solver(value);
  else if (key == "trials") cfg.trials = parse_number<std::size_t>(key, value);
  else if (key == "train_fraction") cfg.train_fraction = parse_number<double>(key, value);
  else if (key == "nu") cfg.nu = parse_number<double>(key, value);
  else if (key == "sigma") cfg.sigma = value == "auto" ? std::nullopt : std::optional(parse_number<double>(key, value));
  else if (key == "neighbors") cfg.neighbors = parse_number<std::size_t>(key, value);
  else if (key == "bootstrap_seed") cfg.seed = parse_number<std::uint64_t>(key, value);
  else return false;
  return true;
}

/// Synthetic event generator keys; returns false when @p key is not one of them.
inline bool set_shm_spec_value(ShmSpec& spec, const std::string& key, const std::string& value) {
  using fpcpd::detail::parse_number;
  if (key == "sensors") spec.sensors = parse_number<std::size_t>(key, value);
  else if (key == "samples") spec.samples = parse_number<std::size_t>(key, value);
  else if (key == "sample_rate") spec.sample_rate = parse_number<double>(key, value);
  else if (key == "events") spec.events = parse_number<std::size_t>(key, value);
  else if (key == "modes") spec.modes = detail::parse_list(key, value);
  else if (key == "mode_jitter") spec.mode_jitter = parse_number<double>(key, value);
  else if (key == "excitation_spread") spec.excitation_spread = parse_number<double>(key, value);
  else if (key == "signal_noise") spec.noise_std = parse_number<double>(key, value);
  else if (key == "stiffness_loss") spec.stiffness_loss = parse_number<double>(key, value);
  else if (key == "damage_frequency") spec.damage_frequency = parse_number<double>(key, value);
  else if (key == "data_seed") spec.seed = parse_number<std::uint64_t>(key, value);
  else if (key.starts_with("anomaly.") && key.size() > 8) {
    const std::string label = key.substr(8);
    std::erase_if(spec.anomalies, [&](const AnomalySpec& a) { return a.label == label; });
    spec.anomalies.push_back(detail::parse_anomaly(key, label, value));
  } else if (key == "anomalies" && value == "none") spec.anomalies.clear();
  else return false;
  return true;
}

/**
 * Reads generator, pipeline (plus keep_bins) and solver keys. Anomaly lines
 * in the file replace the built-in benchmark anomalies as a whole.
 */
inline ShmBenchmarkSpec read_shm_benchmark_spec(std::istream& is, ShmBenchmarkSpec base = {}) {
  const auto kv = read_key_values(is);
  if (std::any_of(kv.begin(), kv.end(), [](const auto& p) { return p.first.starts_with("anomaly."); }))
    base.events.anomalies.clear();
  for (const auto& [k, v] : kv) {
    if (k == "keep_bins") base.keep_bins = fpcpd::detail::parse_number<std::size_t>(k, v);
    else if (set_pipeline_value(base.pipeline, k, v)) continue;
    else if (set_shm_spec_value(base.events, k, v)) continue;
    else set_config_value(base.pipeline.solver, k, v);
  }
  base.validate();
  return base;
}

inline ShmBenchmarkSpec load_shm_benchmark_spec(const std::string& path, ShmBenchmarkSpec base = {}) {
  std::ifstream is(path);
  if (!is) throw Error("cannot open config " + path);
  return read_shm_benchmark_spec(is, base);
}

}  // namespace fpcpd::shm
