#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <string_view>
#include <vector>

#include "topobeat/signal.hpp"

namespace topobeat {

/// Extrema (PK, VL) are zeros of s'; the four inflection kinds are zeros of s''
/// split by the signs of s' (rising/falling) and s''' (derivative peak/valley).
enum class FeatureKind { PK, VL, RDP, RDV, FDP, FDV };

inline constexpr std::array<FeatureKind, 6> kAllFeatureKinds = {
    FeatureKind::PK,  FeatureKind::VL,  FeatureKind::RDP,
    FeatureKind::RDV, FeatureKind::FDP, FeatureKind::FDV};

std::string_view to_string(FeatureKind kind);
std::optional<FeatureKind> parse_feature_kind(std::string_view text);

struct FeaturePoint {
  double tau = 0.0;        ///< seconds, sub-sample resolution
  FeatureKind kind = FeatureKind::PK;
  std::size_t index = 0;   ///< nearest sample index
};

namespace features {

struct Derivatives {
  Waveform d1;
  Waveform d2;
  Waveform d3;
};

/// Central-difference first, second and third derivatives. Samples where a
/// stencil would leave the input's valid range are zero and marked invalid.
/// Throws InvalidInput for fewer than 7 samples.
Derivatives derivatives(const Waveform& w);

struct FeatureOptions {
  std::size_t min_sep = 2;  ///< samples; crossing clusters tighter than this are merged
};

/// Six-kind feature points of w, sorted by tau.
///
/// Extrema come from sign changes of d1, inflections from sign changes of d2;
/// tau is the linear-interpolation zero of the bracketing pair. The sign of the
/// next-higher derivative is the slope of that interpolant, and for inflections
/// d1 is interpolated at tau. Ties (|d1| <= 1e-12 of its peak) are discarded.
///
/// Within each derivative, crossings closer than min_sep collapse: an odd-sized
/// cluster keeps its middle crossing, an even-sized one vanishes. An inflection
/// closer than min_sep to an extremum is dropped.
std::vector<FeaturePoint> extract_features(const Waveform& w, const FeatureOptions& opts = {});

}  // namespace features
}  // namespace topobeat
