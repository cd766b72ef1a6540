#pragma once

// Frequency-domain features for vibration events.
//
// Every (sensor, event) signal is z-scored, transformed with an FFT and
// reduced to the magnitudes of bins 1..keep_bins (DC is dropped; after
// z-scoring it is zero anyway). Magnitudes are scaled by 2/L, so a z-scored
// pure tone at bin m (amplitude sqrt 2) shows up as sqrt 2 at feature m-1.
//
// Tensor mode order: features x sensors x events.

#include <cmath>
#include <complex>
#include <string>
#include <thread>
#include <vector>

#include <unsupported/Eigen/FFT>

#include "fpcpd/tensor.hpp"

namespace fpcpd::shm {

/// Raw events; each is an L x S matrix (rows = samples, columns = sensors).
struct EventMatrix {
  double sample_rate = 1.0;
  std::vector<Eigen::MatrixXd> events;

  std::size_t event_count() const { return events.size(); }
  std::size_t sensors() const { return events.empty() ? 0 : static_cast<std::size_t>(events.front().cols()); }
  std::size_t samples() const { return events.empty() ? 0 : static_cast<std::size_t>(events.front().rows()); }

  void validate() const {
    if (!(sample_rate > 0.0) || !std::isfinite(sample_rate)) throw InvalidArgument("sample_rate must be positive");
    if (events.empty()) throw InvalidArgument("no events");
    for (std::size_t e = 0; e < events.size(); ++e) {
      if (events[e].rows() != events.front().rows() || events[e].cols() != events.front().cols())
        throw InvalidArgument("event " + std::to_string(e) + " has shape " + std::to_string(events[e].rows()) + "x" +
                              std::to_string(events[e].cols()) + ", expected " +
                              std::to_string(events.front().rows()) + "x" + std::to_string(events.front().cols()));
      if (!events[e].allFinite()) throw InvalidArgument("event " + std::to_string(e) + " has non-finite samples");
    }
    if (samples() < 2 || sensors() < 1) throw InvalidArgument("events need at least 2 samples and 1 sensor");
  }
};

struct DegenerateSignal {
  std::size_t sensor = 0;
  std::size_t event = 0;
  bool operator==(const DegenerateSignal&) const = default;
};

struct FeatureTensor {
  DenseTensor3 tensor;
  /// Constant signals whose features were set to zero.
  std::vector<DegenerateSignal> degenerate;
};

/// Features of one signal; returns false (and leaves @p out zero) for a constant signal.
inline bool signal_features(const Eigen::VectorXd& signal, std::size_t keep_bins, Eigen::FFT<double>& fft,
                            Eigen::VectorXd& out) {
  const auto L = signal.size();
  out = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(keep_bins));
  const double mean = signal.mean();
  const double sd = std::sqrt((signal.array() - mean).square().sum() / static_cast<double>(L));
  if (!(sd > 1e-12 * std::max(1.0, std::abs(mean)))) return false;

  std::vector<double> z(static_cast<std::size_t>(L));
  for (Eigen::Index n = 0; n < L; ++n) z[n] = (signal(n) - mean) / sd;
  std::vector<std::complex<double>> spectrum;
  fft.fwd(spectrum, z);
  const double scale = 2.0 / static_cast<double>(L);
  for (std::size_t m = 0; m < keep_bins; ++m) out(static_cast<Eigen::Index>(m)) = scale * std::abs(spectrum[m + 1]);
  return true;
}

/**
 * Builds the features x sensors x events tensor. Work is split over events
 * when threads > 1; the result does not depend on the thread count.
 */
inline FeatureTensor extract_features(const EventMatrix& ev, std::size_t keep_bins, std::size_t threads = 1) {
  ev.validate();
  const std::size_t L = ev.samples(), S = ev.sensors(), T = ev.event_count();
  if (keep_bins < 1 || keep_bins > L / 2)
    throw InvalidArgument("keep_bins must be in [1, " + std::to_string(L / 2) + "], got " + std::to_string(keep_bins));

  FeatureTensor out{DenseTensor3({keep_bins, S, T}), {}};
  std::vector<std::vector<DegenerateSignal>> flags(std::max<std::size_t>(threads, 1));

  auto work = [&](std::size_t worker, std::size_t begin, std::size_t end) {
    Eigen::FFT<double> fft;
    Eigen::VectorXd feat;
    for (std::size_t e = begin; e < end; ++e)
      for (std::size_t s = 0; s < S; ++s) {
        if (!signal_features(ev.events[e].col(static_cast<Eigen::Index>(s)), keep_bins, fft, feat))
          flags[worker].push_back({s, e});
        for (std::size_t m = 0; m < keep_bins; ++m) out.tensor(m, s, e) = feat(static_cast<Eigen::Index>(m));
      }
  };

  const std::size_t n = std::min(flags.size(), T);
  if (n <= 1) {
    work(0, 0, T);
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < n; ++w) pool.emplace_back(work, w, T * w / n, T * (w + 1) / n);
  }
  for (auto& f : flags) out.degenerate.insert(out.degenerate.end(), f.begin(), f.end());
  return out;
}

}  // namespace fpcpd::shm
