#pragma once

// Seeded synthetic data: low-rank tensors with noise, and vibration events
// with injected local damage.

#include <cmath>
#include <numbers>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "fpcpd/shm/features.hpp"
#include "fpcpd/solver_common.hpp"

namespace fpcpd {

struct SyntheticSpec {
  Dims dims{30, 30, 30};
  std::size_t rank = 5;
  double noise_std = 0.0;
  std::uint64_t seed = 1;

  void validate() const {
    if (dims.I == 0 || dims.J == 0 || dims.K == 0) throw InvalidArgument("dims must be positive");
    if (rank < 1) throw InvalidArgument("rank must be >= 1");
    if (!(noise_std >= 0.0) || !std::isfinite(noise_std)) throw InvalidArgument("noise_std must be >= 0");
  }
};

struct SyntheticTensor {
  DenseTensor3 tensor;
  FactorModel truth;
};

/**
 * Truth factors uniform on [0, 1), reconstructed, plus i.i.d. N(0, noise_std^2).
 * The truth stream is derived from the seed so that a solver initialized
 * with random_factors(dims, rank, seed) does not start at the answer.
 */
inline SyntheticTensor generate_synthetic(const SyntheticSpec& spec) {
  spec.validate();
  FactorModel truth = random_factors(spec.dims, spec.rank, detail::splitmix64(spec.seed ^ 0xa4093822299f31d0ULL));
  DenseTensor3 t = reconstruct(truth);
  if (spec.noise_std > 0.0) {
    std::mt19937_64 rng(spec.seed ^ 0x13198a2e03707344ULL);
    std::normal_distribution<double> noise(0.0, spec.noise_std);
    for (double& x : t.values()) x += noise(rng);
  }
  return {std::move(t), std::move(truth)};
}

namespace shm {

/// Damage injected into events [first, first + count) at one sensor.
struct AnomalySpec {
  std::string label;
  std::size_t first = 0;
  std::size_t count = 0;
  std::size_t sensor = 0;
  double magnitude = 0.0;
};

struct ShmSpec {
  std::size_t sensors = 12;
  std::size_t samples = 256;
  double sample_rate = 256.0;
  std::size_t events = 100;
  /// Structural modes (Hz); sensor s sees mode m with shape sin((m+1) pi (s+1) / (S+1)).
  std::vector<double> modes{11.0, 29.0, 47.0, 68.0};
  double mode_jitter = 0.2;       ///< per-event frequency variation (Hz)
  double excitation_spread = 0.2; ///< mode excitation uniform on [1 - spread, 1 + spread]
  double noise_std = 0.3;
  /// Relative drop of every modal frequency per unit damage magnitude.
  double stiffness_loss = 0.01;
  /// Frequency of the local response a damaged sensor picks up (Hz).
  double damage_frequency = 90.0;
  std::vector<AnomalySpec> anomalies;
  std::uint64_t seed = 1;

  void validate() const {
    if (sensors < 1 || samples < 4) throw InvalidArgument("need >= 1 sensor and >= 4 samples");
    if (!(sample_rate > 0.0)) throw InvalidArgument("sample_rate must be positive");
    if (events < 1) throw InvalidArgument("events must be >= 1");
    if (modes.empty()) throw InvalidArgument("at least one mode is required");
    if (!(noise_std >= 0.0) || !(mode_jitter >= 0.0)) throw InvalidArgument("noise_std and mode_jitter must be >= 0");
    if (!(excitation_spread >= 0.0 && excitation_spread < 1.0)) throw InvalidArgument("excitation_spread must be in [0, 1)");
    if (!(stiffness_loss >= 0.0)) throw InvalidArgument("stiffness_loss must be >= 0");
    for (const auto& a : anomalies) {
      if (a.label.empty() || a.label == "healthy") throw InvalidArgument("anomaly label must be non-empty and not 'healthy'");
      if (a.first + a.count > events) throw InvalidArgument("anomaly '" + a.label + "' runs past the last event");
      if (a.sensor >= sensors) throw InvalidArgument("anomaly '" + a.label + "' sensor out of range");
      if (!(a.magnitude >= 0.0)) throw InvalidArgument("anomaly magnitude must be >= 0");
    }
  }
};

struct ShmEvents {
  EventMatrix events;
  std::vector<std::string> labels;
  std::vector<std::optional<std::size_t>> damaged_sensor;
};

/**
 * Healthy response: each sensor sums the structural modes (mode shape times
 * a per-event excitation, random phase, jittered frequency) plus white noise.
 * Damage of magnitude g lowers every modal frequency by stiffness_loss * g
 * (relative) on all sensors, and the damaged sensor also picks up a local
 * response at damage_frequency whose amplitude is g times that sensor's
 * modal RMS (g >= 1 means SNR <= 0 dB there).
 */
inline ShmEvents generate_shm_events(const ShmSpec& spec) {
  spec.validate();
  std::mt19937_64 rng(spec.seed);
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  const double two_pi = 2.0 * std::numbers::pi;
  const std::size_t S = spec.sensors, L = spec.samples, M = spec.modes.size();

  ShmEvents out;
  out.events.sample_rate = spec.sample_rate;
  out.labels.assign(spec.events, "healthy");
  out.damaged_sensor.assign(spec.events, std::nullopt);
  std::vector<const AnomalySpec*> damage(spec.events, nullptr);
  for (const auto& a : spec.anomalies)
    for (std::size_t e = a.first; e < a.first + a.count; ++e) {
      damage[e] = &a;
      out.labels[e] = a.label;
      out.damaged_sensor[e] = a.sensor;
    }

  auto shape = [&](std::size_t m, std::size_t s) {
    return std::sin(static_cast<double>(m + 1) * std::numbers::pi * static_cast<double>(s + 1) /
                    static_cast<double>(S + 1));
  };

  for (std::size_t e = 0; e < spec.events; ++e) {
    std::vector<double> excitation(M), freq(M);
    for (std::size_t m = 0; m < M; ++m) {
      excitation[m] = 1.0 - spec.excitation_spread + 2.0 * spec.excitation_spread * unif(rng);
      freq[m] = spec.modes[m] + spec.mode_jitter * normal(rng);
    }
    Eigen::MatrixXd sig(L, S);
    for (std::size_t s = 0; s < S; ++s) {
      const AnomalySpec* a = damage[e] && damage[e]->sensor == s ? damage[e] : nullptr;
      const double shift = damage[e] ? 1.0 - spec.stiffness_loss * damage[e]->magnitude : 1.0;
      double ref = 0.0;
      std::vector<double> amp(M), phase(M);
      for (std::size_t m = 0; m < M; ++m) {
        amp[m] = shape(m, s) * excitation[m];
        phase[m] = two_pi * unif(rng);
        ref += 0.5 * amp[m] * amp[m];
      }
      const double local_amp = a ? a->magnitude * std::sqrt(2.0 * ref) : 0.0;
      const double local_phase = two_pi * unif(rng);
      for (std::size_t n = 0; n < L; ++n) {
        const double time = static_cast<double>(n) / spec.sample_rate;
        double v = spec.noise_std * normal(rng);
        for (std::size_t m = 0; m < M; ++m) v += amp[m] * std::sin(two_pi * freq[m] * shift * time + phase[m]);
        if (a) v += local_amp * std::sin(two_pi * spec.damage_frequency * time + local_phase);
        sig(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(s)) = v;
      }
    }
    out.events.events.push_back(std::move(sig));
  }
  return out;
}

/// Benchmark layout: 60 healthy, 20 "mild" at sensor 3, 20 "severe" at sensor 8.
inline ShmSpec standard_shm_spec(std::uint64_t seed = 1) {
  ShmSpec spec;
  spec.seed = seed;
  spec.events = 100;
  spec.anomalies = {{"mild", 60, 20, 3, 1.0}, {"severe", 80, 20, 8, 2.0}};
  return spec;
}

}  // namespace shm

}  // namespace fpcpd
