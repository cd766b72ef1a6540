#pragma once

// Solver hyperparameters, per-epoch telemetry and their text formats.
//
// Config files are flat "key = value" lines; '#' starts a comment.
// Trace CSV files carry the header "epoch,seconds,rmse,loss".

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <string>
#include <type_traits>
#include <vector>

#include "fpcpd/tensor.hpp"
#include "fpcpd/tensor_io.hpp"

namespace fpcpd {

enum class InitMethod { Random, Gevd };

inline InitMethod parse_init_method(const std::string& s) {
  if (s == "random") return InitMethod::Random;
  if (s == "gevd") return InitMethod::Gevd;
  throw InvalidArgument("unknown init method '" + s + "' (expected random or gevd)");
}

inline const char* to_string(InitMethod m) { return m == InitMethod::Gevd ? "gevd" : "random"; }

struct SolverConfig {
  std::size_t rank = 5;
  double eta = 1e-3;           ///< initial learning rate
  double eta_decay = 0.0;      ///< eta_t = eta / (1 + t * eta_decay), t = epoch
  double gamma = 0.9;          ///< momentum friction, in [0, 1)
  double noise = 1e-4;         ///< std of the Gaussian perturbation (scaled by eta_t)
  double beta = 0.0;           ///< L1 shrinkage weight
  std::size_t epochs = 200;
  double tol = 1e-6;           ///< relative loss change that counts as converged
  std::uint64_t seed = 1;
  std::size_t threads = 1;
  bool deterministic = true;
  bool nag_lookahead = true;   ///< evaluate gradients at the momentum lookahead point
  double batch_fraction = 0.1; ///< SALS sample size per mode solve
  InitMethod init = InitMethod::Random;

  void validate() const {
    auto fail = [](const std::string& msg) { throw InvalidArgument("invalid solver config: " + msg); };
    if (rank == 0) fail("rank must be >= 1");
    if (!(eta > 0.0) || !std::isfinite(eta)) fail("eta must be > 0");
    if (!(eta_decay >= 0.0)) fail("eta_decay must be >= 0");
    if (!(gamma >= 0.0 && gamma < 1.0)) fail("gamma must lie in [0, 1)");
    if (!(noise >= 0.0)) fail("noise must be >= 0");
    if (!(beta >= 0.0)) fail("beta must be >= 0");
    if (epochs == 0) fail("epochs must be >= 1");
    if (!(tol >= 0.0)) fail("tol must be >= 0");
    if (threads == 0) fail("threads must be >= 1");
    if (!(batch_fraction > 0.0 && batch_fraction <= 1.0)) fail("batch_fraction must lie in (0, 1]");
  }

  double learning_rate(std::size_t epoch) const {
    return eta / (1.0 + static_cast<double>(epoch) * eta_decay);
  }
};

struct TraceRecord {
  std::size_t epoch = 0;  ///< 1-based epoch just completed
  double seconds = 0.0;   ///< cumulative wall clock since the fit started
  double rmse = 0.0;
  double loss = 0.0;
};

using Trace = std::vector<TraceRecord>;

namespace detail {

inline bool parse_bool(const std::string& v) {
  if (v == "1" || v == "true" || v == "yes" || v == "on") return true;
  if (v == "0" || v == "false" || v == "no" || v == "off") return false;
  throw InvalidArgument("expected a boolean, got '" + v + "'");
}

template <class T>
T parse_number(const std::string& key, const std::string& v) {
  if constexpr (std::is_unsigned_v<T>)
    if (v.find('-') != std::string::npos) throw InvalidArgument("config key '" + key + "': bad value '" + v + "'");
  std::istringstream ss(v);
  T out{};
  ss >> out;
  if (!ss || !(ss >> std::ws).eof()) throw InvalidArgument("config key '" + key + "': bad value '" + v + "'");
  return out;
}

}  // namespace detail

/// Applies one key; throws on unknown keys or unparsable values.
inline void set_config_value(SolverConfig& cfg, const std::string& key, const std::string& value) {
  using detail::parse_number;
  if (key == "rank") cfg.rank = parse_number<std::size_t>(key, value);
  else if (key == "eta") cfg.eta = parse_number<double>(key, value);
  else if (key == "eta_decay") cfg.eta_decay = parse_number<double>(key, value);
  else if (key == "gamma") cfg.gamma = parse_number<double>(key, value);
  else if (key == "noise") cfg.noise = parse_number<double>(key, value);
  else if (key == "beta") cfg.beta = parse_number<double>(key, value);
  else if (key == "epochs") cfg.epochs = parse_number<std::size_t>(key, value);
  else if (key == "tol") cfg.tol = parse_number<double>(key, value);
  else if (key == "seed") cfg.seed = parse_number<std::uint64_t>(key, value);
  else if (key == "threads") cfg.threads = parse_number<std::size_t>(key, value);
  else if (key == "deterministic") cfg.deterministic = detail::parse_bool(value);
  else if (key == "nag_lookahead") cfg.nag_lookahead = detail::parse_bool(value);
  else if (key == "batch_fraction") cfg.batch_fraction = parse_number<double>(key, value);
  else if (key == "init") cfg.init = parse_init_method(value);
  else throw InvalidArgument("unknown config key '" + key + "'");
}

/// Parses "key = value" lines into a map, keeping file order irrelevant.
inline std::map<std::string, std::string> read_key_values(std::istream& is) {
  std::map<std::string, std::string> kv;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = detail::trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw InvalidArgument("config line " + std::to_string(lineno) + ": expected key = value");
    kv[detail::trim(line.substr(0, eq))] = detail::trim(line.substr(eq + 1));
  }
  return kv;
}

/// Reads solver keys on top of @p base. Keys listed in @p ignored are skipped.
inline SolverConfig read_config(std::istream& is, SolverConfig base = {},
                                const std::vector<std::string>& ignored = {}) {
  for (const auto& [k, v] : read_key_values(is)) {
    if (std::find(ignored.begin(), ignored.end(), k) != ignored.end()) continue;
    set_config_value(base, k, v);
  }
  base.validate();
  return base;
}

inline SolverConfig load_config(const std::string& path, SolverConfig base = {},
                                const std::vector<std::string>& ignored = {}) {
  std::ifstream is(path);
  if (!is) throw Error("cannot open config " + path);
  return read_config(is, base, ignored);
}

inline void write_config(std::ostream& os, const SolverConfig& c) {
  os.precision(17);
  os << "rank = " << c.rank << '\n'
     << "eta = " << c.eta << '\n'
     << "eta_decay = " << c.eta_decay << '\n'
     << "gamma = " << c.gamma << '\n'
     << "noise = " << c.noise << '\n'
     << "beta = " << c.beta << '\n'
     << "epochs = " << c.epochs << '\n'
     << "tol = " << c.tol << '\n'
     << "seed = " << c.seed << '\n'
     << "threads = " << c.threads << '\n'
     << "deterministic = " << (c.deterministic ? "true" : "false") << '\n'
     << "nag_lookahead = " << (c.nag_lookahead ? "true" : "false") << '\n'
     << "batch_fraction = " << c.batch_fraction << '\n'
     << "init = " << to_string(c.init) << '\n';
}

inline constexpr const char* kTraceHeader = "epoch,seconds,rmse,loss";

inline void write_trace_csv(std::ostream& os, const Trace& trace) {
  os << kTraceHeader << '\n';
  os.precision(17);
  for (const auto& r : trace) os << r.epoch << ',' << r.seconds << ',' << r.rmse << ',' << r.loss << '\n';
}

inline Trace read_trace_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line) || detail::trim(line) != kTraceHeader)
    throw Error(std::string("trace csv must start with '") + kTraceHeader + "'");
  Trace trace;
  std::size_t lineno = 1;
  while (std::getline(is, line)) {
    ++lineno;
    line = detail::trim(line);
    if (line.empty()) continue;
    std::istringstream ss(line);
    TraceRecord r;
    char c1 = 0, c2 = 0, c3 = 0;
    if (!(ss >> r.epoch >> c1 >> r.seconds >> c2 >> r.rmse >> c3 >> r.loss) || c1 != ',' || c2 != ',' || c3 != ',')
      throw Error("trace csv line " + std::to_string(lineno) + ": malformed record");
    trace.push_back(r);
  }
  return trace;
}

}  // namespace fpcpd
