#pragma once

// Tensor serialization.
//
// Binary layout ("FPT3"): 4-byte magic, then I, J, K as little-endian uint64,
// then I*J*K little-endian IEEE-754 doubles in mode-1-fastest order.
// CSV layout: one "i,j,k,value" row per entry, 0-based indices, optional
// header line; entries not listed are zero.

#include <algorithm>
#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

#include "fpcpd/tensor.hpp"

namespace fpcpd {

inline constexpr char kTensorMagic[4] = {'F', 'P', 'T', '3'};

namespace detail {

inline std::uint64_t to_little_endian(std::uint64_t v) {
  if constexpr (std::endian::native == std::endian::big) {
    std::uint64_t r = 0;
    for (int b = 0; b < 8; ++b) r |= ((v >> (8 * b)) & 0xffu) << (8 * (7 - b));
    return r;
  } else {
    return v;
  }
}

inline void write_u64(std::ostream& os, std::uint64_t v) {
  v = to_little_endian(v);
  os.write(reinterpret_cast<const char*>(&v), sizeof v);
}

inline std::uint64_t read_u64(std::istream& is) {
  std::uint64_t v = 0;
  if (!is.read(reinterpret_cast<char*>(&v), sizeof v)) throw Error("tensor file truncated");
  return to_little_endian(v);
}

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

}  // namespace detail

inline void write_tensor(std::ostream& os, const DenseTensor3& t) {
  os.write(kTensorMagic, 4);
  detail::write_u64(os, t.dims().I);
  detail::write_u64(os, t.dims().J);
  detail::write_u64(os, t.dims().K);
  for (double v : t.values()) detail::write_u64(os, std::bit_cast<std::uint64_t>(v));
  if (!os) throw Error("failed writing tensor");
}

inline DenseTensor3 read_tensor(std::istream& is) {
  char magic[4] = {};
  if (!is.read(magic, 4) || std::memcmp(magic, kTensorMagic, 4) != 0)
    throw Error("not an FPT3 tensor file (bad magic)");
  Dims d;
  d.I = detail::read_u64(is);
  d.J = detail::read_u64(is);
  d.K = detail::read_u64(is);
  if (d.I == 0 || d.J == 0 || d.K == 0) throw Error("tensor file has a zero dimension");
  std::vector<double> values(d.size());
  for (double& v : values) v = std::bit_cast<double>(detail::read_u64(is));
  return DenseTensor3(d, std::move(values));
}

inline void save_tensor(const std::string& path, const DenseTensor3& t) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error("cannot open " + path + " for writing");
  write_tensor(os, t);
}

inline DenseTensor3 load_tensor(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw Error("cannot open " + path);
  return read_tensor(is);
}

/**
 * Reads "i,j,k,value" rows. When @p dims is all zero the shape is inferred
 * as (max index + 1) per mode. Duplicate coordinates are rejected.
 */
inline DenseTensor3 read_tensor_csv(std::istream& is, Dims dims = {}) {
  struct Row {
    std::size_t i, j, k;
    double v;
  };
  std::vector<Row> rows;
  std::string line;
  std::size_t lineno = 0;
  Dims seen{0, 0, 0};
  while (std::getline(is, line)) {
    ++lineno;
    line = detail::trim(line);
    if (line.empty() || line[0] == '#') continue;
    std::stringstream ss(line);
    std::string f[4];
    int n = 0;
    while (n < 4 && std::getline(ss, f[n], ',')) ++n;
    std::string extra;
    if (n != 4 || std::getline(ss, extra, ','))
      throw Error("tensor csv line " + std::to_string(lineno) + ": expected 4 fields");
    Row r{};
    try {
      const long long ii = std::stoll(f[0]);
      const long long jj = std::stoll(f[1]);
      const long long kk = std::stoll(f[2]);
      if (ii < 0 || jj < 0 || kk < 0) throw InvalidArgument("negative index");
      r = {static_cast<std::size_t>(ii), static_cast<std::size_t>(jj), static_cast<std::size_t>(kk),
           std::stod(f[3])};
    } catch (const std::exception&) {
      if (rows.empty() && lineno == 1) continue;  // header
      throw Error("tensor csv line " + std::to_string(lineno) + ": cannot parse '" + line + "'");
    }
    seen.I = std::max(seen.I, r.i + 1);
    seen.J = std::max(seen.J, r.j + 1);
    seen.K = std::max(seen.K, r.k + 1);
    rows.push_back(r);
  }
  if (dims.size() == 0) dims = seen;
  if (rows.empty() && dims.size() == 0) throw Error("tensor csv is empty");
  if (seen.I > dims.I || seen.J > dims.J || seen.K > dims.K)
    throw Error("tensor csv index exceeds declared dims " + to_string(dims));
  std::vector<double> values(dims.size(), 0.0);
  std::vector<bool> filled(dims.size(), false);
  for (const Row& r : rows) {
    const std::size_t at = r.i + dims.I * (r.j + dims.J * r.k);
    if (filled[at])
      throw Error("tensor csv has duplicate entry (" + std::to_string(r.i) + "," + std::to_string(r.j) +
                  "," + std::to_string(r.k) + ")");
    filled[at] = true;
    values[at] = r.v;
  }
  return DenseTensor3(dims, std::move(values));
}

inline void write_tensor_csv(std::ostream& os, const DenseTensor3& t) {
  os << "i,j,k,value\n";
  os.precision(17);
  const Dims d = t.dims();
  for (std::size_t k = 0; k < d.K; ++k)
    for (std::size_t j = 0; j < d.J; ++j)
      for (std::size_t i = 0; i < d.I; ++i) os << i << ',' << j << ',' << k << ',' << t(i, j, k) << '\n';
}

/// Dispatches on the extension: ".csv" uses the CSV reader, everything else FPT3.
inline DenseTensor3 load_tensor_any(const std::string& path) {
  if (path.size() >= 4 && path.compare(path.size() - 4, 4, ".csv") == 0) {
    std::ifstream is(path);
    if (!is) throw Error("cannot open " + path);
    return read_tensor_csv(is);
  }
  return load_tensor(path);
}

}  // namespace fpcpd
