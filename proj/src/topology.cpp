#include "topobeat/topology.hpp"

#include <algorithm>
#include <cmath>

#include "topobeat/error.hpp"

namespace topobeat::topology {

namespace {

using cplx = std::complex<double>;

constexpr std::size_t index_of(FeatureKind k) { return static_cast<std::size_t>(k); }

// Window of 2K+1 samples around the sample nearest tau, or nullopt if any part
// of it falls outside [valid_begin, valid_end).
std::optional<std::size_t> window_start(double tau, double t0, double fs, std::size_t half,
                                        std::size_t valid_begin, std::size_t valid_end) {
  const double centre = std::round((tau - t0) * fs);
  if (centre - static_cast<double>(half) < static_cast<double>(valid_begin)) return std::nullopt;
  if (centre + static_cast<double>(half) >= static_cast<double>(valid_end)) return std::nullopt;
  return static_cast<std::size_t>(centre) - half;
}

struct RealWindow {
  std::vector<double> v;  // DC removed
  double norm = 0.0;
};

std::optional<RealWindow> real_window(const Waveform& w, double tau, std::size_t half) {
  const auto start = window_start(tau, w.t0, w.fs, half, w.valid_begin, w.valid_end);
  if (!start) return std::nullopt;
  RealWindow out;
  out.v.assign(w.samples.begin() + static_cast<std::ptrdiff_t>(*start),
               w.samples.begin() + static_cast<std::ptrdiff_t>(*start + 2 * half + 1));
  double mean = 0.0;
  for (double x : out.v) mean += x;
  mean /= static_cast<double>(out.v.size());
  double ss = 0.0;
  for (double& x : out.v) {
    x -= mean;
    ss += x * x;
  }
  if (!(ss > 0.0)) return std::nullopt;
  out.norm = std::sqrt(ss);
  return out;
}

struct ComplexWindow {
  std::vector<cplx> u;
  double norm2 = 0.0;
};

std::optional<ComplexWindow> complex_window(const ComplexSeries& s, double tau, std::size_t half) {
  const auto start = window_start(tau, s.t0, s.fs, half, s.valid_begin, s.valid_end);
  if (!start) return std::nullopt;
  ComplexWindow out;
  out.u.assign(s.values.begin() + static_cast<std::ptrdiff_t>(*start),
               s.values.begin() + static_cast<std::ptrdiff_t>(*start + 2 * half + 1));
  for (const auto& z : out.u) out.norm2 += std::norm(z);
  if (!(out.norm2 > 0.0)) return std::nullopt;
  return out;
}

double cosine(const RealWindow& a, const RealWindow& b) {
  double dot = 0.0;
  for (std::size_t k = 0; k < a.v.size(); ++k) dot += a.v[k] * b.v[k];
  return std::clamp(dot / (a.norm * b.norm), -1.0, 1.0);
}

double coherence(const ComplexWindow& a, const ComplexWindow& b) {
  cplx inner{0.0, 0.0};
  for (std::size_t k = 0; k < a.u.size(); ++k) inner += std::conj(a.u[k]) * b.u[k];
  return std::clamp(std::norm(inner) / (a.norm2 * b.norm2), 0.0, 1.0);
}

}  // namespace

AssignmentTable::AssignmentTable(double gamma) : gamma_(gamma) {
  if (!std::isfinite(gamma)) throw InvalidInput("AssignmentTable: gamma must be finite");
  const cplx j{0.0, 1.0};
  values_[index_of(FeatureKind::PK)] = -1.0;
  values_[index_of(FeatureKind::VL)] = 1.0;
  values_[index_of(FeatureKind::RDP)] = j;
  values_[index_of(FeatureKind::RDV)] = -j * gamma;
  values_[index_of(FeatureKind::FDP)] = j * gamma;
  values_[index_of(FeatureKind::FDV)] = -j;
}

AssignmentTable AssignmentTable::rotated(double phi) const {
  AssignmentTable out = *this;
  const cplx r = std::polar(1.0, phi);
  for (auto& v : out.values_) v *= r;
  return out;
}

void TopologyParams::validate() const {
  if (!(t_c > 0.0) || !(t_t > 0.0)) throw InvalidInput("TopologyParams: windows must be positive");
  // Thresholds above 1 are accepted; they simply admit no pair.
  if (!(c_th >= -1.0)) throw InvalidInput("TopologyParams: c_th must be >= -1");
  if (!(q_th >= 0.0)) throw InvalidInput("TopologyParams: q_th must be >= 0");
  if (!(ibi_min > 0.0 && ibi_min < ibi_max))
    throw InvalidInput("TopologyParams: need 0 < ibi_min < ibi_max");
}

ComplexSeries assign_signal(std::span<const FeaturePoint> features, const AssignmentTable& table,
                            double fs, double t0, std::size_t n) {
  if (features.empty()) throw InvalidInput("assign_signal: feature list is empty");
  ComplexSeries s;
  s.fs = fs;
  s.t0 = t0;
  s.values.resize(n);
  s.valid_begin = 0;
  s.valid_end = n;
  std::size_t k = 0;  // last feature with tau <= t, or 0
  for (std::size_t i = 0; i < n; ++i) {
    const double t = t0 + static_cast<double>(i) / fs;
    while (k + 1 < features.size() && features[k + 1].tau <= t) ++k;
    std::size_t pick = k;
    if (k + 1 < features.size() && features[k].tau <= t) {
      const double before = t - features[k].tau;
      const double after = features[k + 1].tau - t;
      if (after < before) pick = k + 1;
    }
    s.values[i] = table(features[pick].kind);
  }
  return s;
}

ComplexSeries assign_signal(std::span<const FeaturePoint> features, const AssignmentTable& table,
                            const Waveform& grid) {
  ComplexSeries s = assign_signal(features, table, grid.fs, grid.t0, grid.size());
  s.valid_begin = grid.valid_begin;
  s.valid_end = grid.valid_end;
  return s;
}

std::size_t half_window(double window_s, double fs) {
  return static_cast<std::size_t>(std::lround(window_s * fs / 2.0));
}

std::optional<double> ordinary_corr(const Waveform& w, double tau_m, double tau_n, double t_c) {
  const std::size_t half = half_window(t_c, w.fs);
  const auto a = real_window(w, tau_m, half);
  const auto b = real_window(w, tau_n, half);
  if (!a || !b) return std::nullopt;
  return cosine(*a, *b);
}

std::optional<double> topology_corr(const ComplexSeries& s_t, double tau_m, double tau_n,
                                    double t_t) {
  const std::size_t half = half_window(t_t, s_t.fs);
  const auto a = complex_window(s_t, tau_m, half);
  const auto b = complex_window(s_t, tau_n, half);
  if (!a || !b) return std::nullopt;
  return coherence(*a, *b);
}

std::vector<IbiEstimate> estimate_ibis(const Waveform& w, std::span<const FeaturePoint> features,
                                       const AssignmentTable& table, const TopologyParams& p,
                                       EstimateStats* stats) {
  p.validate();
  EstimateStats local;
  std::vector<IbiEstimate> out;
  if (features.empty()) {
    if (stats) *stats = local;
    return out;
  }
  for (std::size_t i = 1; i < features.size(); ++i)
    if (features[i].tau < features[i - 1].tau)
      throw InvalidInput("estimate_ibis: features must be sorted by tau");

  const ComplexSeries s_t = assign_signal(features, table, w);
  const std::size_t half_c = half_window(p.t_c, w.fs);
  const std::size_t half_t = half_window(p.t_t, w.fs);

  std::vector<std::optional<RealWindow>> rw(features.size());
  std::vector<std::optional<ComplexWindow>> cw(features.size());
  for (std::size_t i = 0; i < features.size(); ++i) {
    rw[i] = real_window(w, features[i].tau, half_c);
    cw[i] = complex_window(s_t, features[i].tau, half_t);
  }

  for (std::size_t n = 0; n < features.size(); ++n) {
    const FeaturePoint& fn = features[n];
    std::optional<IbiEstimate> best;
    double best_score = 0.0;
    for (std::size_t m = n + 1; m < features.size(); ++m) {
      const double gap = features[m].tau - fn.tau;
      if (gap > p.ibi_max) break;
      if (features[m].kind != fn.kind || gap < p.ibi_min) continue;
      ++local.pairs_evaluated;
      if (!rw[n] || !rw[m] || !cw[n] || !cw[m]) {
        ++local.pairs_skipped;
        continue;
      }
      const double c = cosine(*rw[n], *rw[m]);
      if (c < p.c_th) continue;
      const double q = coherence(*cw[n], *cw[m]);
      if (q < p.q_th) continue;
      const double score = c * q;
      if (!best || score > best_score) {
        best_score = score;
        best = IbiEstimate{0.5 * (fn.tau + features[m].tau), gap, n, m, fn.kind, c, q};
      }
    }
    if (best) out.push_back(*best);
  }
  std::stable_sort(out.begin(), out.end(),
                   [](const IbiEstimate& a, const IbiEstimate& b) { return a.t_est < b.t_est; });
  if (stats) *stats = local;
  return out;
}

}  // namespace topobeat::topology
