#pragma once

#include <array>
#include <complex>
#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "topobeat/features.hpp"
#include "topobeat/signal.hpp"

namespace topobeat::topology {

/// Complex value assigned to each feature kind:
///   PK -1, VL +1, RDP +j, RDV -j*gamma, FDP +j*gamma, FDV -j.
/// Every pair of mirrored kinds maps to negated values.
class AssignmentTable {
 public:
  explicit AssignmentTable(double gamma);

  double gamma() const noexcept { return gamma_; }
  std::complex<double> operator()(FeatureKind kind) const noexcept {
    return values_[static_cast<std::size_t>(kind)];
  }

  /// Same table multiplied by exp(j phi); leaves every topology correlation unchanged.
  AssignmentTable rotated(double phi) const;

 private:
  double gamma_;
  std::array<std::complex<double>, 6> values_;
};

/// Defaults: 0.5 s windows, c >= 0.7, q >= 0.5, IBI in [0.4, 1.2] s.
struct TopologyParams {
  double t_c = 0.5;
  double t_t = 0.5;
  double c_th = 0.7;
  double q_th = 0.5;
  double ibi_min = 0.4;
  double ibi_max = 1.2;

  /// Throws InvalidInput on an inconsistent parameter set.
  void validate() const;
};

/// Piecewise-constant complex signal on a uniform grid.
struct ComplexSeries {
  std::vector<std::complex<double>> values;
  double fs = 1.0;
  double t0 = 0.0;
  std::size_t valid_begin = 0;
  std::size_t valid_end = 0;
};

/// s_t on the grid t0 + i/fs, i < n: the value of the feature whose tau is
/// nearest each grid time (ties go to the earlier feature). Features must be
/// sorted by tau. Throws InvalidInput on an empty feature list.
ComplexSeries assign_signal(std::span<const FeaturePoint> features, const AssignmentTable& table,
                            double fs, double t0, std::size_t n);

/// Same, on the grid (and valid range) of an existing waveform.
ComplexSeries assign_signal(std::span<const FeaturePoint> features, const AssignmentTable& table,
                            const Waveform& grid);

/// Half-window in samples, round(T fs / 2).
std::size_t half_window(double window_s, double fs);

/// Cosine similarity of the DC-removed 2K+1 sample windows centred on the
/// samples nearest tau_m and tau_n. nullopt when a window leaves the valid
/// range or has zero variance.
std::optional<double> ordinary_corr(const Waveform& w, double tau_m, double tau_n, double t_c);

/// |u_m^H u_n|^2 / (|u_m|^2 |u_n|^2) over windows of s_t. nullopt when a
/// window leaves the valid range or has zero norm.
std::optional<double> topology_corr(const ComplexSeries& s_t, double tau_m, double tau_n, double t_t);

struct IbiEstimate {
  double t_est = 0.0;  ///< pair midpoint (s)
  double ibi = 0.0;    ///< s
  std::size_t left = 0;   ///< feature index of the earlier point
  std::size_t right = 0;  ///< feature index of the later point
  FeatureKind kind = FeatureKind::PK;
  double c = 0.0;
  double q = 0.0;
};

struct EstimateStats {
  std::size_t pairs_evaluated = 0;
  std::size_t pairs_skipped = 0;  ///< window out of range or degenerate
};

/// For each feature n, the later same-kind features m with tau_m - tau_n in
/// [ibi_min, ibi_max], c >= c_th and q >= q_th are candidates; the one with the
/// largest c*q (earliest on ties) yields an estimate. Sorted by t_est.
std::vector<IbiEstimate> estimate_ibis(const Waveform& w, std::span<const FeaturePoint> features,
                                       const AssignmentTable& table, const TopologyParams& p,
                                       EstimateStats* stats = nullptr);

}  // namespace topobeat::topology
