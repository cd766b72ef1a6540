#pragma once

// Event ingestion and pipeline report tables.
//
// Event directory: one CSV per event (rows = samples, columns = sensors, an
// optional non-numeric header line) named <event_id>.csv, plus a manifest
// CSV with header event_id,label,sample_rate[,damaged_sensor].

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "fpcpd/shm/features.hpp"
#include "fpcpd/shm/pipeline.hpp"
#include "fpcpd/tensor_io.hpp"

namespace fpcpd::shm {

struct ManifestRow {
  std::string event_id;
  std::string label;
  double sample_rate = 0.0;
  std::optional<std::size_t> damaged_sensor;
};

struct EventSet {
  EventMatrix events;
  std::vector<std::string> ids;
  std::vector<std::string> labels;
  std::vector<std::optional<std::size_t>> damaged_sensor;
};

namespace detail {

inline std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) out.push_back(fpcpd::detail::trim(cell));
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

inline bool parse_double(const std::string& s, double& out) {
  if (s.empty()) return false;
  std::istringstream ss(s);
  ss >> out;
  return ss && (ss >> std::ws).eof();
}

}  // namespace detail

inline std::vector<ManifestRow> read_manifest(std::istream& is, const std::string& name = "manifest") {
  auto fail = [&](std::size_t line, const std::string& what) -> Error {
    return Error(name + " line " + std::to_string(line) + ": " + what);
  };
  std::string line;
  std::size_t lineno = 0;
  std::vector<std::string> header;
  while (header.empty() && std::getline(is, line)) {
    ++lineno;
    if (!fpcpd::detail::trim(line).empty()) header = detail::split_csv(fpcpd::detail::trim(line));
  }
  if (header.size() < 3 || header[0] != "event_id" || header[1] != "label" || header[2] != "sample_rate" ||
      header.size() > 4 || (header.size() == 4 && header[3] != "damaged_sensor"))
    throw fail(lineno, "header must be event_id,label,sample_rate[,damaged_sensor]");

  std::vector<ManifestRow> rows;
  while (std::getline(is, line)) {
    ++lineno;
    line = fpcpd::detail::trim(line);
    if (line.empty()) continue;
    const auto cells = detail::split_csv(line);
    if (cells.size() < 3 || cells.size() > header.size())
      throw fail(lineno, "expected " + std::to_string(header.size()) + " fields, got " + std::to_string(cells.size()));
    ManifestRow r;
    r.event_id = cells[0];
    r.label = cells[1];
    if (r.event_id.empty()) throw fail(lineno, "empty event_id");
    if (r.event_id.find_first_of("/\\") != std::string::npos) throw fail(lineno, "event_id may not contain path separators");
    if (r.label.empty()) throw fail(lineno, "empty label");
    if (!detail::parse_double(cells[2], r.sample_rate) || !(r.sample_rate > 0.0))
      throw fail(lineno, "sample_rate must be a positive number, got '" + cells[2] + "'");
    if (cells.size() == 4 && !cells[3].empty()) {
      if (cells[3].find_first_not_of("0123456789") != std::string::npos)
        throw fail(lineno, "damaged_sensor must be a sensor index, got '" + cells[3] + "'");
      r.damaged_sensor = std::stoull(cells[3]);
    }
    for (const auto& prev : rows)
      if (prev.event_id == r.event_id) throw fail(lineno, "duplicate event_id '" + r.event_id + "'");
    rows.push_back(std::move(r));
  }
  if (rows.empty()) throw fail(lineno, "no events listed");
  return rows;
}

/// Reads one event file: rows = samples, columns = sensors.
inline Eigen::MatrixXd read_event_csv(std::istream& is, const std::string& name = "event") {
  std::vector<std::vector<double>> rows;
  std::string line;
  std::size_t lineno = 0;
  bool first = true;
  while (std::getline(is, line)) {
    ++lineno;
    line = fpcpd::detail::trim(line);
    if (line.empty()) continue;
    const auto cells = detail::split_csv(line);
    std::vector<double> vals(cells.size());
    bool numeric = true;
    for (std::size_t c = 0; c < cells.size() && numeric; ++c) numeric = detail::parse_double(cells[c], vals[c]);
    if (!numeric) {
      if (first) {
        first = false;
        continue;  // header
      }
      throw Error(name + " line " + std::to_string(lineno) + ": non-numeric value");
    }
    first = false;
    if (!rows.empty() && vals.size() != rows.front().size())
      throw Error(name + " line " + std::to_string(lineno) + ": expected " + std::to_string(rows.front().size()) +
                  " columns, got " + std::to_string(vals.size()));
    rows.push_back(std::move(vals));
  }
  if (rows.empty()) throw Error(name + ": no samples");
  Eigen::MatrixXd m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.front().size()));
  for (std::size_t r = 0; r < rows.size(); ++r)
    for (std::size_t c = 0; c < rows[r].size(); ++c) m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = rows[r][c];
  return m;
}

inline void write_event_csv(std::ostream& os, const Eigen::MatrixXd& signals) {
  for (Eigen::Index s = 0; s < signals.cols(); ++s) os << (s ? "," : "") << "s" << s;
  os << '\n';
  os.precision(17);
  for (Eigen::Index r = 0; r < signals.rows(); ++r) {
    for (Eigen::Index s = 0; s < signals.cols(); ++s) os << (s ? "," : "") << signals(r, s);
    os << '\n';
  }
}

/// Loads every event named in the manifest from @p dir.
inline EventSet load_events(const std::filesystem::path& dir, const std::filesystem::path& manifest) {
  std::ifstream ms(manifest);
  if (!ms) throw Error("cannot open manifest " + manifest.string());
  const auto rows = read_manifest(ms, manifest.string());
  EventSet set;
  set.events.sample_rate = rows.front().sample_rate;
  for (std::size_t n = 0; n < rows.size(); ++n) {
    const auto& r = rows[n];
    if (r.sample_rate != set.events.sample_rate)
      throw Error(manifest.string() + ": event '" + r.event_id + "' has sample_rate " + std::to_string(r.sample_rate) +
                  ", others use " + std::to_string(set.events.sample_rate));
    const auto path = dir / (r.event_id + ".csv");
    std::ifstream es(path);
    if (!es) throw Error("cannot open event file " + path.string());
    set.events.events.push_back(read_event_csv(es, path.string()));
    set.ids.push_back(r.event_id);
    set.labels.push_back(r.label);
    set.damaged_sensor.push_back(r.damaged_sensor);
    if (r.damaged_sensor && *r.damaged_sensor >= static_cast<std::size_t>(set.events.events.back().cols()))
      throw Error(manifest.string() + ": damaged_sensor of '" + r.event_id + "' is out of range");
  }
  set.events.validate();
  return set;
}

/// Writes <dir>/<id>.csv for every event and <dir>/manifest.csv.
inline void save_events(const std::filesystem::path& dir, const EventSet& set) {
  std::filesystem::create_directories(dir);
  std::ofstream ms(dir / "manifest.csv");
  if (!ms) throw Error("cannot write " + (dir / "manifest.csv").string());
  ms.precision(17);
  ms << "event_id,label,sample_rate,damaged_sensor\n";
  for (std::size_t n = 0; n < set.ids.size(); ++n) {
    ms << set.ids[n] << ',' << set.labels[n] << ',' << set.events.sample_rate << ',';
    if (n < set.damaged_sensor.size() && set.damaged_sensor[n]) ms << *set.damaged_sensor[n];
    ms << '\n';
    std::ofstream es(dir / (set.ids[n] + ".csv"));
    if (!es) throw Error("cannot write event " + set.ids[n]);
    write_event_csv(es, set.events.events[n]);
  }
  if (!ms) throw Error("error writing manifest");
}

inline EventSet to_event_set(ShmEvents ev) {
  EventSet set;
  set.events = std::move(ev.events);
  set.labels = std::move(ev.labels);
  set.damaged_sensor = std::move(ev.damaged_sensor);
  for (std::size_t n = 0; n < set.labels.size(); ++n) {
    char id[32];
    std::snprintf(id, sizeof id, "event_%03zu", n);
    set.ids.emplace_back(id);
  }
  return set;
}

inline constexpr const char* kDecisionHeader = "trial,event_id,label,decision,flagged,top_sensor";
inline constexpr const char* kLocalizationHeader = "trial,event_id,label,sensor,score";

/// One row per scored (trial, test event).
inline void write_decisions_csv(std::ostream& os, const PipelineReport& r, const std::vector<std::string>& ids,
                                const std::vector<std::string>& labels) {
  os << kDecisionHeader << '\n';
  os.precision(17);
  for (const auto& d : r.decisions)
    os << d.trial << ',' << ids.at(d.event) << ',' << labels.at(d.event) << ',' << d.decision << ','
       << (d.flagged ? 1 : 0) << ',' << d.top_sensor << '\n';
}

/// One row per (trial, test event, sensor).
inline void write_localization_csv(std::ostream& os, const PipelineReport& r, const std::vector<std::string>& ids,
                                   const std::vector<std::string>& labels) {
  os << kLocalizationHeader << '\n';
  os.precision(17);
  for (const auto& d : r.decisions)
    for (Eigen::Index s = 0; s < d.localization.size(); ++s)
      os << d.trial << ',' << ids.at(d.event) << ',' << labels.at(d.event) << ',' << s << ',' << d.localization(s)
         << '\n';
}

}  // namespace fpcpd::shm
