#include "topobeat/dsp.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "topobeat/error.hpp"

namespace topobeat {

using std::numbers::pi;

Waveform Waveform::make(std::vector<double> samples, double fs, double t0) {
  if (!(fs > 0.0) || !std::isfinite(fs)) throw InvalidInput("Waveform: fs must be positive");
  for (std::size_t i = 0; i < samples.size(); ++i)
    if (!std::isfinite(samples[i]))
      throw InvalidInput("Waveform: non-finite sample at index " + std::to_string(i));
  Waveform w;
  w.samples = std::move(samples);
  w.fs = fs;
  w.t0 = t0;
  w.valid_begin = 0;
  w.valid_end = w.samples.size();
  return w;
}

IQRecord IQRecord::make(std::vector<std::complex<double>> samples, double fs, double t0) {
  if (!(fs > 0.0) || !std::isfinite(fs)) throw InvalidInput("IQRecord: fs must be positive");
  for (std::size_t i = 0; i < samples.size(); ++i)
    if (!std::isfinite(samples[i].real()) || !std::isfinite(samples[i].imag()))
      throw InvalidInput("IQRecord: non-finite sample at index " + std::to_string(i));
  IQRecord r;
  r.samples = std::move(samples);
  r.fs = fs;
  r.t0 = t0;
  return r;
}

namespace dsp {

IQRecord remove_dc(const IQRecord& iq) {
  if (iq.samples.empty()) throw InvalidInput("remove_dc: empty record");
  std::complex<double> mean{0.0, 0.0};
  for (const auto& z : iq.samples) mean += z;
  mean /= static_cast<double>(iq.samples.size());
  IQRecord out = iq;
  for (auto& z : out.samples) z -= mean;
  return out;
}

Waveform extract_phase(const IQRecord& iq) {
  std::vector<double> phase(iq.samples.size());
  for (std::size_t i = 0; i < iq.samples.size(); ++i) {
    const auto& z = iq.samples[i];
    if (z.real() == 0.0 && z.imag() == 0.0)
      throw InvalidInput("extract_phase: zero-magnitude IQ sample at index " + std::to_string(i));
    phase[i] = std::atan2(z.imag(), z.real());
    // atan2 returns -pi for (negative, -0.0); fold onto the half-open range.
    if (phase[i] == -pi) phase[i] = pi;
  }
  return Waveform::make(std::move(phase), iq.fs, iq.t0);
}

Waveform unwrap_phase(const Waveform& w) {
  Waveform out = w;
  double offset = 0.0;
  for (std::size_t i = 1; i < w.samples.size(); ++i) {
    const double gap = w.samples[i] + offset - out.samples[i - 1];
    if (std::abs(gap) >= pi) offset -= 2.0 * pi * std::round(gap / (2.0 * pi));
    out.samples[i] = w.samples[i] + offset;
  }
  return out;
}

double kaiser_beta(double atten_db) {
  if (atten_db > 50.0) return 0.1102 * (atten_db - 8.7);
  if (atten_db >= 21.0) return 0.5842 * std::pow(atten_db - 21.0, 0.4) + 0.07886 * (atten_db - 21.0);
  return 0.0;
}

std::size_t kaiser_taps(double atten_db, double transition_hz, double fs) {
  const double dw = 2.0 * pi * transition_hz / fs;
  auto n = static_cast<std::size_t>(std::ceil((atten_db - 7.95) / (2.285 * dw))) + 1;
  if (n % 2 == 0) ++n;
  return std::max<std::size_t>(n, 3);
}

namespace {

std::vector<double> kaiser_window(std::size_t n, double beta) {
  std::vector<double> w(n);
  const double denom = std::cyl_bessel_i(0.0, beta);
  const double half = 0.5 * static_cast<double>(n - 1);
  for (std::size_t k = 0; k < n; ++k) {
    const double r = (static_cast<double>(k) - half) / half;
    w[k] = std::cyl_bessel_i(0.0, beta * std::sqrt(std::max(0.0, 1.0 - r * r))) / denom;
  }
  return w;
}

}  // namespace

std::vector<double> kaiser_lowpass(double cutoff_hz, double transition_hz, double atten_db,
                                   double fs, std::size_t max_taps) {
  if (!(fs > 0.0)) throw InvalidInput("kaiser_lowpass: fs must be positive");
  if (!(cutoff_hz > 0.0 && cutoff_hz < 0.5 * fs))
    throw InvalidInput("kaiser_lowpass: cutoff must lie in (0, fs/2)");
  if (!(transition_hz > 0.0)) throw InvalidInput("kaiser_lowpass: transition must be positive");
  const std::size_t n = kaiser_taps(atten_db, transition_hz, fs);
  if (n > max_taps)
    throw InvalidInput("FIR design infeasible: transition " + std::to_string(transition_hz) +
                       " Hz at fs " + std::to_string(fs) + " Hz requires " + std::to_string(n) +
                       " taps, budget is " + std::to_string(max_taps));
  const auto win = kaiser_window(n, kaiser_beta(atten_db));
  const double fc = cutoff_hz / fs;
  const auto mid = static_cast<std::ptrdiff_t>(n / 2);
  std::vector<double> h(n);
  double sum = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    const double x = static_cast<double>(static_cast<std::ptrdiff_t>(k) - mid);
    const double sinc = x == 0.0 ? 2.0 * fc : std::sin(2.0 * pi * fc * x) / (pi * x);
    h[k] = sinc * win[k];
    sum += h[k];
  }
  for (auto& v : h) v /= sum;
  // Exact symmetry regardless of rounding in the window evaluation.
  for (std::size_t k = 0; k < n / 2; ++k) {
    const double avg = 0.5 * (h[k] + h[n - 1 - k]);
    h[k] = h[n - 1 - k] = avg;
  }
  return h;
}

std::vector<double> design_fir(const FirSpec& spec, double fs) {
  if (!(spec.cutoff_hz > 0.0 && spec.cutoff_hz < 0.5 * fs))
    throw InvalidInput("design_fir: cutoff must lie in (0, fs/2)");
  if (spec.stopband_atten_db < 60.0)
    throw InvalidInput("design_fir: stopband attenuation must be at least 60 dB");
  if (!(spec.transition_hz > 0.0) || spec.cutoff_hz - 0.5 * spec.transition_hz <= 0.0)
    throw InvalidInput("design_fir: transition must be positive and smaller than 2x cutoff");
  if (spec.cutoff_hz + 0.5 * spec.transition_hz >= 0.5 * fs)
    throw InvalidInput("design_fir: passband edge beyond Nyquist");
  // The Kaiser length/beta formulas are approximate and can miss the target by
  // about 1 dB, so the stopband is measured and the design tightened until it holds.
  const double stop_edge = spec.cutoff_hz - 0.5 * spec.transition_hz;
  const double limit = std::pow(10.0, -spec.stopband_atten_db / 20.0);
  for (double extra = 0.0; extra <= 10.0; extra += 0.25) {
    auto h = kaiser_lowpass(spec.cutoff_hz, spec.transition_hz, spec.stopband_atten_db + extra, fs,
                            spec.max_taps);
    for (auto& v : h) v = -v;
    h[h.size() / 2] += 1.0;
    double worst = 0.0;
    constexpr int kGrid = 512;
    for (int k = 0; k <= kGrid; ++k)
      worst = std::max(worst, std::abs(frequency_response(h, stop_edge * k / kGrid, fs)));
    if (worst <= limit) return h;
  }
  throw InvalidInput("design_fir: could not reach " + std::to_string(spec.stopband_atten_db) +
                     " dB stopband attenuation");
}

std::complex<double> frequency_response(std::span<const double> taps, double f, double fs) {
  const double w = 2.0 * pi * f / fs;
  const double mid = 0.5 * static_cast<double>(taps.size() - 1);
  std::complex<double> acc{0.0, 0.0};
  for (std::size_t k = 0; k < taps.size(); ++k)
    acc += taps[k] * std::polar(1.0, -w * (static_cast<double>(k) - mid));
  return acc;
}

Waveform apply_fir_zero_delay(const Waveform& w, std::span<const double> taps) {
  if (taps.empty() || taps.size() % 2 == 0)
    throw InvalidInput("apply_fir_zero_delay: tap count must be odd");
  if (w.size() < taps.size())
    throw InvalidInput("apply_fir_zero_delay: waveform (" + std::to_string(w.size()) +
                       " samples) shorter than filter (" + std::to_string(taps.size()) + " taps)");
  const std::size_t n = w.size();
  const std::size_t half = taps.size() / 2;
  const auto& x = w.samples;
  Waveform out = w;
  for (std::size_t i = 0; i < n; ++i) {
    // y[i] = sum_k h[k] x[i + half - k]
    const std::size_t k_lo = i + half >= n ? i + half - (n - 1) : 0;
    const std::size_t k_hi = std::min(taps.size() - 1, i + half);
    double acc = 0.0;
    for (std::size_t k = k_lo; k <= k_hi; ++k) acc += taps[k] * x[i + half - k];
    out.samples[i] = acc;
  }
  out.valid_begin = std::min(n, w.valid_begin + half);
  out.valid_end = w.valid_end >= half ? w.valid_end - half : 0;
  if (out.valid_end < out.valid_begin) out.valid_end = out.valid_begin;
  return out;
}

Waveform decimate(const Waveform& w, int factor) {
  if (factor < 1) throw InvalidInput("decimate: factor must be >= 1");
  if (factor == 1) return w;
  const double fs_out = w.fs / factor;
  const auto taps = kaiser_lowpass(0.5 * fs_out, 0.1 * fs_out, 70.0, w.fs, 1'000'001);
  const std::size_t n = w.size();
  const std::size_t half = taps.size() / 2;
  const auto f = static_cast<std::size_t>(factor);
  const std::size_t n_out = n == 0 ? 0 : (n - 1) / f + 1;

  Waveform out;
  out.fs = fs_out;
  out.t0 = w.t0;
  out.samples.resize(n_out);
  for (std::size_t j = 0; j < n_out; ++j) {
    const std::size_t i = j * f;
    const std::size_t k_lo = i + half >= n ? i + half - (n - 1) : 0;
    const std::size_t k_hi = std::min(taps.size() - 1, i + half);
    double acc = 0.0;
    for (std::size_t k = k_lo; k <= k_hi; ++k) acc += taps[k] * w.samples[i + half - k];
    out.samples[j] = acc;
  }
  // Output j is valid when its whole input support lies in the input valid range.
  const std::size_t first = (w.valid_begin + half + f - 1) / f;
  const std::size_t last_excl =
      w.valid_end >= half + 1 ? (w.valid_end - 1 - half) / f + 1 : 0;
  out.valid_begin = std::min(first, n_out);
  out.valid_end = std::max(out.valid_begin, std::min(last_excl, n_out));
  return out;
}

int resolve_decimation(const PreprocessOptions& opts, double fs) {
  if (opts.decim > 0) return opts.decim;
  return std::max(1, static_cast<int>(std::lround(fs / 100.0)));
}

Waveform preprocess_displacement(const Waveform& w, const PreprocessOptions& opts) {
  const Waveform low = decimate(w, resolve_decimation(opts, w.fs));
  const auto taps = design_fir(opts.hpf, low.fs);
  return apply_fir_zero_delay(low, taps);
}

Waveform preprocess(const IQRecord& iq, const PreprocessOptions& opts) {
  return preprocess_displacement(unwrap_phase(extract_phase(remove_dc(iq))), opts);
}

}  // namespace dsp
}  // namespace topobeat
