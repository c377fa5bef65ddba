#pragma once

#include <complex>
#include <cstddef>
#include <string>
#include <vector>

namespace topobeat {

/// Uniformly sampled real time series. Samples outside [valid_begin, valid_end)
/// exist but are not trustworthy (filter edges) and must not be analysed.
struct Waveform {
  std::vector<double> samples;
  double fs = 1.0;
  double t0 = 0.0;
  std::size_t valid_begin = 0;
  std::size_t valid_end = 0;

  /// Builds a fully valid waveform. Throws InvalidInput on fs <= 0 or
  /// non-finite samples.
  static Waveform make(std::vector<double> samples, double fs, double t0 = 0.0);

  std::size_t size() const noexcept { return samples.size(); }
  double dt() const noexcept { return 1.0 / fs; }
  double time_at(double index) const noexcept { return t0 + index / fs; }
  /// Fractional sample index of time t.
  double index_of(double t) const noexcept { return (t - t0) * fs; }
  bool is_valid(std::size_t i) const noexcept { return i >= valid_begin && i < valid_end; }
};

/// Complex baseband radar samples (I + jQ).
struct IQRecord {
  std::vector<std::complex<double>> samples;
  double fs = 1.0;
  double t0 = 0.0;
  std::string label;

  /// Throws InvalidInput on fs <= 0 or non-finite samples.
  static IQRecord make(std::vector<std::complex<double>> samples, double fs, double t0 = 0.0);

  std::size_t size() const noexcept { return samples.size(); }
};

}  // namespace topobeat
