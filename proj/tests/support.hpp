#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <vector>

#include "topobeat/model.hpp"
#include "topobeat/signal.hpp"
#include "topobeat/synth.hpp"

namespace test_support {

inline topobeat::Waveform sample_model(const topobeat::model::HarmonicModel& m, double fs, double duration,
                                       double scale = 1.0) {
  const auto n = static_cast<std::size_t>(std::llround(duration * fs));
  std::vector<double> x(n);
  for (std::size_t i = 0; i < n; ++i)
    x[i] = scale * topobeat::model::eval_model(m, static_cast<double>(i) / fs, 0);
  return topobeat::Waveform::make(std::move(x), fs);
}

inline std::vector<double> regular_beats(double first, double ibi, double until) {
  std::vector<double> b;
  for (double t = first; t < until; t += ibi) b.push_back(t);
  return b;
}

// Radar scene with slow linear body drift so the IQ arc wraps several times,
// which keeps mean-subtraction DC removal well conditioned.
inline topobeat::model::SyntheticScene drifting_scene(std::vector<double> beats, double duration,
                                                      double alpha = 0.4, double theta = 1.0) {
  topobeat::model::SyntheticScene sc;
  sc.beat_times = std::move(beats);
  sc.duration = duration;
  sc.harmonic.alpha = alpha;
  sc.harmonic.theta = theta;
  sc.respiration_amp = 1e-3;
  sc.motion_drift.poly = {0.0, 0.25e-3};
  return sc;
}

// Ten-scene cohort with jittered beats and spread harmonic content:
// IBIs walk in 0.6-1.0 s, alpha spans 0.2-0.5, theta steps by 0.6 rad,
// per-beat alpha/theta jitter 0.1/0.3, 3 Hz band-limited noise at `snr_db`.
inline std::vector<topobeat::model::SynthResult> jittered_cohort(std::uint64_t base = 0, double duration = 120.0,
                                                                  double snr_db = 20.0, int n = 10) {
  std::vector<topobeat::model::SynthResult> out;
  for (int s = 0; s < n; ++s) {
    topobeat::model::BeatWalk walk;
    walk.duration = duration;
    walk.ibi_lo = 0.6;
    walk.ibi_hi = 1.0;
    walk.ibi_start = 0.8;
    auto sc = drifting_scene(topobeat::model::random_walk_beats(walk, base + 1000 + static_cast<std::uint64_t>(s)),
                             duration, 0.2 + 0.3 * s / 9.0, 0.6 * s);
    sc.alpha_jitter = 0.1;
    sc.theta_jitter = 0.3;
    sc.noise_bandwidth = 3.0;
    sc.noise_std = topobeat::model::noise_std_for_snr(sc, snr_db);
    out.push_back(topobeat::model::synthesize(sc, base + static_cast<std::uint64_t>(s)));
  }
  return out;
}

// Sub-sample peak of a real vector by parabolic interpolation.
inline double parabolic_peak(const std::vector<double>& v, std::size_t k) {
  if (k == 0 || k + 1 >= v.size()) return static_cast<double>(k);
  const double a = v[k - 1], b = v[k], c = v[k + 1];
  const double den = a - 2.0 * b + c;
  return den == 0.0 ? static_cast<double>(k) : static_cast<double>(k) + 0.5 * (a - c) / den;
}

}  // namespace test_support
