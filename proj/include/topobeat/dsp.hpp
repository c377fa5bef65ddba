#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

#include "topobeat/signal.hpp"

namespace topobeat::dsp {

/// High-pass FIR requirements. The design is a Kaiser-windowed sinc with its
/// -6 dB point at `cutoff_hz`; the stopband ends at cutoff - transition/2 and
/// the passband starts at cutoff + transition/2.
struct FirSpec {
  double cutoff_hz = 0.5;
  double stopband_atten_db = 60.0;
  double transition_hz = 0.2;
  std::size_t max_taps = 8001;
};

/// Subtracts the complex time average. Throws InvalidInput on an empty record.
IQRecord remove_dc(const IQRecord& iq);

/// Four-quadrant phase atan2(Q, I) in (-pi, pi]. Throws InvalidInput naming
/// the first sample with zero magnitude.
Waveform extract_phase(const IQRecord& iq);

/// Adds integer multiples of 2 pi wherever |x[i] - x[i-1]| >= pi so every
/// consecutive difference ends up below pi. out[0] == in[0].
Waveform unwrap_phase(const Waveform& w);

double kaiser_beta(double atten_db);

/// Odd Kaiser length for the given attenuation and transition width.
std::size_t kaiser_taps(double atten_db, double transition_hz, double fs);

/// Linear-phase low-pass with unity DC gain and -6 dB at cutoff_hz.
/// Throws InvalidInput if the required length exceeds max_taps.
std::vector<double> kaiser_lowpass(double cutoff_hz, double transition_hz, double atten_db,
                                   double fs, std::size_t max_taps);

/// High-pass taps for `spec` at sample rate fs. Symmetric, odd length, taps
/// sum to zero. Throws InvalidInput when cutoff >= fs/2, attenuation < 60 dB, or
/// the tap budget is too small (the message carries the required count).
std::vector<double> design_fir(const FirSpec& spec, double fs);

/// H(f) of an FIR evaluated at frequency f (Hz), referenced to the centre tap
/// so a symmetric filter has a real response.
std::complex<double> frequency_response(std::span<const double> taps, double f, double fs);

/// Convolves with group-delay compensation: output sample i is aligned with
/// input sample i. The (taps-1)/2 samples at each end (and anything derived
/// from already-invalid input) are excluded from the valid range.
/// Throws InvalidInput for even-length taps or input shorter than taps.
Waveform apply_fir_zero_delay(const Waveform& w, std::span<const double> taps);

/// Anti-alias low-pass (stopband from 0.55 fs_out, 70 dB) then keeps every
/// factor-th sample. factor 1 returns the input unchanged.
Waveform decimate(const Waveform& w, int factor);

struct PreprocessOptions {
  FirSpec hpf;
  int decim = 0;  ///< 0 selects the factor bringing fs closest to 100 Hz
};

/// Decimation factor used for input rate fs.
int resolve_decimation(const PreprocessOptions& opts, double fs);

/// remove_dc -> extract_phase -> unwrap_phase -> decimate -> high-pass.
/// Output is in phase radians; the 4 pi / lambda scale is not applied.
Waveform preprocess(const IQRecord& iq, const PreprocessOptions& opts);

/// decimate -> high-pass for an already demodulated displacement.
Waveform preprocess_displacement(const Waveform& w, const PreprocessOptions& opts);

}  // namespace topobeat::dsp
