#pragma once

#include <complex>
#include <cstdint>
#include <vector>

#include "topobeat/model.hpp"
#include "topobeat/signal.hpp"

namespace topobeat::model {

/// Slow body motion: polynomial trend plus an optional Brownian component.
struct DriftSpec {
  std::vector<double> poly;  ///< displacement = sum poly[k] * t^k (m)
  double walk_std = 0.0;     ///< random-walk std per sqrt(second) (m)
};

/// Synthetic vital-sign scene: d(t) = d0 + drift(t) + respiration(t) + heart(t) + noise.
///
/// The heartbeat is a single HarmonicModel template time-warped so that phase
/// 2 pi k falls exactly on beat_times[k]. `harmonic.omega0` is ignored; the
/// local rate follows the beat intervals.
struct SyntheticScene {
  std::vector<double> beat_times;
  HarmonicModel harmonic{0.0, 0.4, 1.0};
  double alpha_jitter = 0.0;  ///< per-beat uniform jitter of alpha (+/-)
  double theta_jitter = 0.0;  ///< per-beat uniform jitter of theta (+/- rad)
  double heart_amp = 1e-4;    ///< m
  double respiration_amp = 0.0;
  double respiration_freq = 0.25;
  DriftSpec motion_drift;
  double noise_std = 0.0;       ///< additive displacement noise (m)
  double noise_bandwidth = 0.0; ///< Hz; 0 keeps the noise white up to fs/2
  double fs = 2000.0;
  double duration = 0.0;        ///< s; 0 ends the record at the last beat
  double wavelength = 12.5e-3;  ///< m; 24 GHz carrier
  double distance = 0.5;        ///< d0 (m)
  double iq_amplitude = 1.0;
  std::complex<double> clutter{0.0, 0.0};
  double ibi_min = 0.4;
  double ibi_max = 1.2;
};

struct SynthResult {
  IQRecord iq;              ///< A exp(j 4 pi d / lambda) + clutter
  Waveform displacement;    ///< d(t) in metres, same grid as iq
  std::vector<double> beat_times;  ///< ground-truth beats inside the record
};

/// Deterministic for a given seed. Throws InvalidInput when beat intervals
/// leave [ibi_min, ibi_max], beats are not strictly increasing, or fs is below
/// four times the highest component frequency.
SynthResult synthesize(const SyntheticScene& scene, std::uint64_t seed);

/// Beat-time generator: IBI performs a reflected Gaussian random walk inside
/// [ibi_lo, ibi_hi].
struct BeatWalk {
  double duration = 120.0;
  double first_beat = 0.1;
  double ibi_start = 0.8;
  double ibi_lo = 0.7;
  double ibi_hi = 0.9;
  double step_std = 0.02;
};

std::vector<double> random_walk_beats(const BeatWalk& walk, std::uint64_t seed);

/// Displacement power of the heartbeat template, (A^2 / 2)(1 + alpha^2).
double heartbeat_power(const SyntheticScene& scene);

/// Noise std giving the requested heartbeat-to-noise power ratio.
double noise_std_for_snr(const SyntheticScene& scene, double snr_db);

}  // namespace topobeat::model
