#include "topobeat/features.hpp"

#include <algorithm>
#include <cmath>
#include <iterator>
#include <limits>

#include "topobeat/error.hpp"

namespace topobeat {

std::string_view to_string(FeatureKind kind) {
  switch (kind) {
    case FeatureKind::PK: return "PK";
    case FeatureKind::VL: return "VL";
    case FeatureKind::RDP: return "RDP";
    case FeatureKind::RDV: return "RDV";
    case FeatureKind::FDP: return "FDP";
    case FeatureKind::FDV: return "FDV";
  }
  return "?";
}

std::optional<FeatureKind> parse_feature_kind(std::string_view text) {
  for (FeatureKind k : kAllFeatureKinds)
    if (to_string(k) == text) return k;
  return std::nullopt;
}

namespace features {

namespace {

Waveform blank_like(const Waveform& w, std::size_t margin) {
  Waveform d;
  d.samples.assign(w.size(), 0.0);
  d.fs = w.fs;
  d.t0 = w.t0;
  d.valid_begin = std::min(w.valid_begin + margin, w.size());
  d.valid_end = w.valid_end >= margin ? w.valid_end - margin : 0;
  if (d.valid_end < d.valid_begin) d.valid_end = d.valid_begin;
  return d;
}

struct Crossing {
  double pos;       // fractional sample index of the zero
  std::size_t lo;   // bracketing samples
  std::size_t hi;
  bool rising;      // derivative goes from negative to positive
};

// Samples with |v| <= floor count as exact zeros (no sign).
std::vector<Crossing> find_crossings(const Waveform& d, double floor) {
  std::vector<Crossing> out;
  const auto& v = d.samples;
  std::size_t last = d.valid_end;  // index of last nonzero sample, none yet
  for (std::size_t i = d.valid_begin; i < d.valid_end; ++i) {
    if (std::abs(v[i]) <= floor) continue;
    if (last != d.valid_end && (v[last] < 0.0) != (v[i] < 0.0)) {
      const double frac = v[last] / (v[last] - v[i]);
      out.push_back({static_cast<double>(last) + frac * static_cast<double>(i - last), last, i,
                     v[i] > v[last]});
    }
    last = i;
  }
  return out;
}

std::vector<Crossing> debounce(const std::vector<Crossing>& in, double min_sep) {
  std::vector<Crossing> out;
  std::size_t start = 0;
  while (start < in.size()) {
    std::size_t end = start + 1;
    while (end < in.size() && in[end].pos - in[end - 1].pos < min_sep) ++end;
    const std::size_t count = end - start;
    if (count % 2 == 1) {
      // Net direction across the cluster is that of its first crossing.
      Crossing c = in[start + count / 2];
      c.rising = in[start].rising;
      out.push_back(c);
    }
    start = end;
  }
  return out;
}

// Bound on finite-difference round-off for a stencil of the given order.
double roundoff_floor(const Waveform& w, int order) {
  double peak = 0.0;
  for (std::size_t i = w.valid_begin; i < w.valid_end; ++i) peak = std::max(peak, std::abs(w.samples[i]));
  return 64.0 * std::numeric_limits<double>::epsilon() * peak * std::pow(w.fs, order);
}

double peak_abs(const Waveform& d) {
  double peak = 0.0;
  for (std::size_t i = d.valid_begin; i < d.valid_end; ++i) peak = std::max(peak, std::abs(d.samples[i]));
  return peak;
}

}  // namespace

Derivatives derivatives(const Waveform& w) {
  if (w.size() < 7) throw InvalidInput("derivatives: waveform needs at least 7 samples");
  const auto& x = w.samples;
  const std::size_t n = w.size();
  const double dt = w.dt();
  Derivatives d{blank_like(w, 1), blank_like(w, 1), blank_like(w, 2)};
  for (std::size_t i = 1; i + 1 < n; ++i) {
    d.d1.samples[i] = (x[i + 1] - x[i - 1]) / (2.0 * dt);
    d.d2.samples[i] = (x[i + 1] - 2.0 * x[i] + x[i - 1]) / (dt * dt);
  }
  for (std::size_t i = 2; i + 2 < n; ++i)
    d.d3.samples[i] = (x[i + 2] - 2.0 * x[i + 1] + 2.0 * x[i - 1] - x[i - 2]) / (2.0 * dt * dt * dt);
  // Only the stencil interior is meaningful.
  for (auto* dw : {&d.d1, &d.d2, &d.d3})
    for (std::size_t i = 0; i < n; ++i)
      if (!dw->is_valid(i)) dw->samples[i] = 0.0;
  return d;
}

std::vector<FeaturePoint> extract_features(const Waveform& w, const FeatureOptions& opts) {
  if (w.valid_end <= w.valid_begin || w.valid_end - w.valid_begin < 7) return {};
  const Derivatives d = derivatives(w);
  const double min_sep = static_cast<double>(opts.min_sep);

  auto make_point = [&](double pos, FeatureKind kind) {
    FeaturePoint p;
    p.tau = w.time_at(pos);
    p.kind = kind;
    p.index = static_cast<std::size_t>(std::lround(pos));
    return p;
  };

  std::vector<FeaturePoint> extrema;
  for (const auto& c : debounce(find_crossings(d.d1, roundoff_floor(w, 1)), min_sep))
    extrema.push_back(make_point(c.pos, c.rising ? FeatureKind::VL : FeatureKind::PK));

  const double d1_tie = 1e-12 * peak_abs(d.d1);
  std::vector<FeaturePoint> points = extrema;
  for (const auto& c : debounce(find_crossings(d.d2, roundoff_floor(w, 2)), min_sep)) {
    const double frac = (c.pos - static_cast<double>(c.lo)) / static_cast<double>(c.hi - c.lo);
    const double slope = d.d1.samples[c.lo] + frac * (d.d1.samples[c.hi] - d.d1.samples[c.lo]);
    if (std::abs(slope) <= d1_tie) continue;
    const auto next = std::lower_bound(extrema.begin(), extrema.end(), w.time_at(c.pos),
                                       [](const FeaturePoint& e, double t) { return e.tau < t; });
    const bool near_extremum =
        (next != extrema.end() && w.index_of(next->tau) - c.pos < min_sep) ||
        (next != extrema.begin() && c.pos - w.index_of(std::prev(next)->tau) < min_sep);
    if (near_extremum) continue;
    // Between VL and PK the waveform rises; a slope sign contradicting the
    // surrounding extrema comes from noise that the debounce removed.
    if (next != extrema.begin() && (std::prev(next)->kind == FeatureKind::VL) != (slope > 0.0)) continue;
    if (next != extrema.end() && (next->kind == FeatureKind::PK) != (slope > 0.0)) continue;
    FeatureKind kind;
    if (slope > 0.0)
      kind = c.rising ? FeatureKind::RDV : FeatureKind::RDP;
    else
      kind = c.rising ? FeatureKind::FDV : FeatureKind::FDP;
    points.push_back(make_point(c.pos, kind));
  }

  std::sort(points.begin(), points.end(),
            [](const FeaturePoint& a, const FeaturePoint& b) { return a.tau < b.tau; });
  return points;
}

}  // namespace features
}  // namespace topobeat
