#include "topobeat/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "topobeat/error.hpp"

namespace topobeat::metrics {

ReferenceBeats::ReferenceBeats(std::vector<double> r_times) : times_(std::move(r_times)) {
  for (std::size_t i = 0; i < times_.size(); ++i) {
    if (!std::isfinite(times_[i]))
      throw InvalidInput("ReferenceBeats: non-finite beat time at index " + std::to_string(i));
    if (i > 0 && !(times_[i] > times_[i - 1]))
      throw InvalidInput("ReferenceBeats: beat times must be strictly increasing (index " +
                         std::to_string(i) + ")");
  }
}

std::optional<double> reference_ibi_at(const ReferenceBeats& ref, double t) {
  const auto r = ref.times();
  if (r.size() < 2 || t < r.front() || t >= r.back()) return std::nullopt;
  // First beat strictly after t closes the interval containing t.
  const auto hi = std::upper_bound(r.begin(), r.end(), t);
  return *hi - *(hi - 1);
}

RmsResult rms_error(std::span<const topology::IbiEstimate> est, const ReferenceBeats& ref) {
  RmsResult out;
  double ss = 0.0;
  for (const auto& e : est) {
    const auto truth = reference_ibi_at(ref, e.t_est);
    if (!truth) {
      ++out.excluded;
      continue;
    }
    const double r = 1000.0 * (e.ibi - *truth);
    out.residuals_ms.push_back(r);
    ss += r * r;
  }
  if (!out.residuals_ms.empty())
    out.rms_ms = std::sqrt(ss / static_cast<double>(out.residuals_ms.size()));
  return out;
}

double tcr(std::span<const topology::IbiEstimate> est, const ReferenceBeats& ref, double eps_ms,
           double dt_tcr, double t_all, double t_start) {
  if (!(dt_tcr > 0.0)) throw InvalidInput("tcr: dt_tcr must be positive");
  if (!(t_all > 0.0)) throw InvalidInput("tcr: t_all must be positive");
  const auto n_intervals = static_cast<std::size_t>(std::floor(t_all / dt_tcr + 1e-9));
  if (n_intervals == 0) return 0.0;
  std::vector<bool> hit(n_intervals, false);
  for (const auto& e : est) {
    const double rel = e.t_est - t_start;
    if (rel < 0.0) continue;
    const auto k = static_cast<std::size_t>(std::floor(rel / dt_tcr));
    if (k >= n_intervals) continue;
    const auto truth = reference_ibi_at(ref, e.t_est);
    if (truth && std::abs(1000.0 * (e.ibi - *truth)) < eps_ms) hit[k] = true;
  }
  const auto k_eps = static_cast<double>(std::count(hit.begin(), hit.end(), true));
  return k_eps * dt_tcr / (static_cast<double>(n_intervals) * dt_tcr);
}

EvalReport evaluate(std::span<const topology::IbiEstimate> est, const ReferenceBeats& ref,
                    const TcrOptions& opts, double t_all, double t_start) {
  auto rms = rms_error(est, ref);
  EvalReport report;
  report.rms_ms = rms.rms_ms;
  report.residuals_ms = std::move(rms.residuals_ms);
  report.excluded = rms.excluded;
  report.n_estimates = est.size();
  report.tcr = t_all > 0.0 ? tcr(est, ref, opts.eps_ms, opts.dt_tcr, t_all, t_start) : 0.0;
  return report;
}

Summary summarize(std::span<const double> values) {
  Summary s;
  s.n = values.size();
  if (s.n == 0) return s;
  double sum = 0.0;
  for (double v : values) sum += v;
  s.mean = sum / static_cast<double>(s.n);
  if (s.n > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - s.mean) * (v - s.mean);
    s.std = std::sqrt(ss / static_cast<double>(s.n - 1));
  }
  return s;
}

}  // namespace topobeat::metrics
