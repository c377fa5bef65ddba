#include "topobeat/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "topobeat/error.hpp"

namespace topobeat::model {

using std::numbers::pi;

namespace {

struct Knot {
  double time;
  double slope;  // d(phase)/dt at the knot
  double alpha;
  double theta;
};

// Smoothstep blend with zero derivative at both ends, keeps the per-beat shape
// parameters C1 across beat boundaries.
double blend(double a, double b, double s) {
  return a + (b - a) * 0.5 * (1.0 - std::cos(pi * s));
}

// 6th-order Butterworth low-pass (three bilinear-transform biquads), then
// rescaled to unit sample std.
void lowpass_noise(std::vector<double>& x, double cutoff_hz, double fs) {
  constexpr int kOrder = 6;
  const double k = std::tan(pi * cutoff_hz / fs);
  for (int stage = 0; stage < kOrder / 2; ++stage) {
    const double q = 1.0 / (2.0 * std::cos(pi * (2.0 * stage + 1.0) / (2.0 * kOrder)));
    const double norm = 1.0 / (1.0 + k / q + k * k);
    const double b0 = k * k * norm;
    const double b1 = 2.0 * b0;
    const double a1 = 2.0 * (k * k - 1.0) * norm;
    const double a2 = (1.0 - k / q + k * k) * norm;
    double z1 = 0.0, z2 = 0.0;
    for (double& v : x) {
      const double y = b0 * v + z1;
      z1 = b1 * v - a1 * y + z2;
      z2 = b0 * v - a2 * y;
      v = y;
    }
  }
  double mean = 0.0;
  for (double v : x) mean += v;
  mean /= static_cast<double>(x.size());
  double ss = 0.0;
  for (double v : x) ss += (v - mean) * (v - mean);
  const double sd = std::sqrt(ss / static_cast<double>(x.size()));
  if (sd > 0.0)
    for (double& v : x) v = (v - mean) / sd;
}

void check_beats(const SyntheticScene& scene) {
  const auto& b = scene.beat_times;
  if (b.size() < 2) throw InvalidInput("synthesize: at least two beat times are required");
  for (std::size_t k = 1; k < b.size(); ++k) {
    const double ibi = b[k] - b[k - 1];
    if (!(ibi > 0.0)) throw InvalidInput("synthesize: beat times must be strictly increasing");
    if (ibi < scene.ibi_min - 1e-12 || ibi > scene.ibi_max + 1e-12)
      throw InvalidInput("synthesize: beat interval " + std::to_string(ibi) + " s at beat " +
                         std::to_string(k) + " outside [" + std::to_string(scene.ibi_min) +
                         ", " + std::to_string(scene.ibi_max) + "]");
  }
}

}  // namespace

double heartbeat_power(const SyntheticScene& scene) {
  const double a = scene.heart_amp;
  const double al = scene.harmonic.alpha;
  return 0.5 * a * a * (1.0 + al * al);
}

double noise_std_for_snr(const SyntheticScene& scene, double snr_db) {
  return std::sqrt(heartbeat_power(scene) / std::pow(10.0, snr_db / 10.0));
}

SynthResult synthesize(const SyntheticScene& scene, std::uint64_t seed) {
  check_beats(scene);
  {
    HarmonicModel shape = scene.harmonic;
    shape.omega0 = 1.0;
    shape.validate();
  }
  if (!(scene.fs > 0.0)) throw InvalidInput("synthesize: fs must be positive");
  if (!(scene.wavelength > 0.0)) throw InvalidInput("synthesize: wavelength must be positive");

  const auto& beats = scene.beat_times;
  double min_ibi = beats[1] - beats[0];
  for (std::size_t k = 2; k < beats.size(); ++k) min_ibi = std::min(min_ibi, beats[k] - beats[k - 1]);
  double f_max = 2.0 / min_ibi;
  if (scene.respiration_amp != 0.0) f_max = std::max(f_max, scene.respiration_freq);
  if (scene.noise_bandwidth > 0.0) f_max = std::max(f_max, scene.noise_bandwidth);
  if (scene.fs < 4.0 * f_max)
    throw InvalidInput("synthesize: fs must be at least 4x the highest component (" +
                       std::to_string(f_max) + " Hz)");

  const double duration = scene.duration > 0.0 ? scene.duration : beats.back();
  const auto n = static_cast<std::size_t>(std::floor(duration * scene.fs));
  if (n < 2) throw InvalidInput("synthesize: record too short");

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);

  // Extend the beat list with virtual beats so phase is defined on [0, duration].
  std::vector<double> times(beats.begin(), beats.end());
  const double first_ibi = beats[1] - beats[0];
  const double last_ibi = beats[beats.size() - 1] - beats[beats.size() - 2];
  std::size_t prepended = 0;
  while (times.front() > -first_ibi) {
    times.insert(times.begin(), times.front() - first_ibi);
    ++prepended;
  }
  while (times.back() < duration + last_ibi) times.push_back(times.back() + last_ibi);

  std::vector<Knot> knots(times.size());
  for (std::size_t j = 0; j < times.size(); ++j) {
    const double span = j == 0                  ? times[1] - times[0]
                        : j + 1 == times.size() ? times[j] - times[j - 1]
                                                : 0.5 * (times[j + 1] - times[j - 1]);
    knots[j].time = times[j];
    knots[j].slope = 2.0 * pi / span;
    knots[j].alpha = std::clamp(scene.harmonic.alpha + scene.alpha_jitter * unit(rng), 0.0, 0.999);
    knots[j].theta = scene.harmonic.theta + scene.theta_jitter * unit(rng);
  }

  std::vector<double> noise(n, 0.0);
  if (scene.noise_std > 0.0) {
    std::normal_distribution<double> gauss(0.0, 1.0);
    for (auto& v : noise) v = gauss(rng);
    if (scene.noise_bandwidth > 0.0) lowpass_noise(noise, scene.noise_bandwidth, scene.fs);
    for (auto& v : noise) v *= scene.noise_std;
  }

  std::normal_distribution<double> walk(0.0, scene.motion_drift.walk_std * std::sqrt(1.0 / scene.fs));
  double walk_pos = 0.0;

  std::vector<double> disp(n);
  std::vector<std::complex<double>> iq(n);
  std::size_t seg = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double t = static_cast<double>(i) / scene.fs;
    while (seg + 2 < knots.size() && t >= knots[seg + 1].time) ++seg;
    const Knot& a = knots[seg];
    const Knot& b = knots[seg + 1];
    const double h = b.time - a.time;
    const double s = (t - a.time) / h;
    // Cubic Hermite phase: 2 pi at each beat, C1 across beats.
    const double h00 = 2 * s * s * s - 3 * s * s + 1;
    const double h10 = s * s * s - 2 * s * s + s;
    const double h01 = -2 * s * s * s + 3 * s * s;
    const double h11 = s * s * s - s * s;
    const double phase_a = 2.0 * pi * (static_cast<double>(seg) - static_cast<double>(prepended));
    const double phase = h00 * phase_a + h10 * h * a.slope + h01 * (phase_a + 2.0 * pi) + h11 * h * b.slope;
    const double alpha = blend(a.alpha, b.alpha, s);
    const double theta = blend(a.theta, b.theta, s);
    const double heart = scene.heart_amp * (std::cos(phase) + alpha * std::cos(2.0 * phase + theta));

    const double resp = scene.respiration_amp * std::sin(2.0 * pi * scene.respiration_freq * t);

    double drift = 0.0;
    double tp = 1.0;
    for (double c : scene.motion_drift.poly) {
      drift += c * tp;
      tp *= t;
    }
    if (scene.motion_drift.walk_std > 0.0) {
      walk_pos += walk(rng);
      drift += walk_pos;
    }

    const double d = scene.distance + drift + resp + heart + noise[i];
    disp[i] = d;
    iq[i] = scene.iq_amplitude * std::polar(1.0, 4.0 * pi * d / scene.wavelength) + scene.clutter;
  }

  SynthResult out;
  out.iq = IQRecord::make(std::move(iq), scene.fs, 0.0);
  out.displacement = Waveform::make(std::move(disp), scene.fs, 0.0);
  for (double b : beats)
    if (b >= 0.0 && b < duration) out.beat_times.push_back(b);
  return out;
}

std::vector<double> random_walk_beats(const BeatWalk& walk, std::uint64_t seed) {
  if (!(walk.ibi_lo > 0.0 && walk.ibi_lo <= walk.ibi_hi))
    throw InvalidInput("random_walk_beats: need 0 < ibi_lo <= ibi_hi");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> step(0.0, walk.step_std);
  std::vector<double> beats;
  double t = walk.first_beat;
  double ibi = std::clamp(walk.ibi_start, walk.ibi_lo, walk.ibi_hi);
  while (t <= walk.duration + walk.ibi_hi) {
    beats.push_back(t);
    ibi += step(rng);
    while (ibi < walk.ibi_lo || ibi > walk.ibi_hi) {
      if (ibi < walk.ibi_lo) ibi = 2.0 * walk.ibi_lo - ibi;
      if (ibi > walk.ibi_hi) ibi = 2.0 * walk.ibi_hi - ibi;
    }
    t += ibi;
  }
  return beats;
}

}  // namespace topobeat::model
