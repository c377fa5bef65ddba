#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "topobeat/topology.hpp"

namespace topobeat::metrics {

/// ECG beat instants. Strictly increasing; fewer than two beats is allowed but
/// defines no interval.
class ReferenceBeats {
 public:
  ReferenceBeats() = default;
  /// Throws InvalidInput unless strictly increasing and finite.
  explicit ReferenceBeats(std::vector<double> r_times);

  std::span<const double> times() const noexcept { return times_; }
  std::size_t size() const noexcept { return times_.size(); }

 private:
  std::vector<double> times_;
};

/// IBI of the half-open interval [r_k, r_{k+1}) containing t, if any.
std::optional<double> reference_ibi_at(const ReferenceBeats& ref, double t);

struct RmsResult {
  std::optional<double> rms_ms;        ///< nullopt when nothing matched
  std::vector<double> residuals_ms;    ///< matched estimates, in input order
  std::size_t excluded = 0;            ///< estimates with no reference interval
};

/// residual = 1000 (ibi - reference_ibi_at(t_est)); unmatched estimates are excluded.
RmsResult rms_error(std::span<const topology::IbiEstimate> est, const ReferenceBeats& ref);

/// Fraction of dt_tcr-long intervals of [t_start, t_start + t_all) holding at
/// least one estimate (by t_est) whose |residual| < eps_ms. A trailing partial
/// interval is dropped from both numerator and denominator.
double tcr(std::span<const topology::IbiEstimate> est, const ReferenceBeats& ref, double eps_ms,
           double dt_tcr, double t_all, double t_start = 0.0);

struct TcrOptions {
  double eps_ms = 50.0;
  double dt_tcr = 1.0;
};

struct EvalReport {
  std::optional<double> rms_ms;
  double tcr = 0.0;
  std::size_t n_estimates = 0;
  std::vector<double> residuals_ms;
  std::size_t excluded = 0;
};

EvalReport evaluate(std::span<const topology::IbiEstimate> est, const ReferenceBeats& ref,
                    const TcrOptions& opts, double t_all, double t_start = 0.0);

/// Mean and sample standard deviation (n - 1 denominator; 0 for n < 2).
struct Summary {
  double mean = 0.0;
  double std = 0.0;
  std::size_t n = 0;
};

Summary summarize(std::span<const double> values);

}  // namespace topobeat::metrics
