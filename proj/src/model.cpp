#include "topobeat/model.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "topobeat/error.hpp"

namespace topobeat::model {

using std::numbers::pi;

void HarmonicModel::validate() const {
  if (!(omega0 > 0.0) || !std::isfinite(omega0))
    throw InvalidInput("HarmonicModel: omega0 must be positive and finite");
  if (!(alpha >= 0.0 && alpha < 1.0))
    throw InvalidInput("HarmonicModel: alpha must satisfy 0 <= alpha < 1");
  if (!std::isfinite(theta))
    throw InvalidInput("HarmonicModel: theta must be finite");
}

double eval_model(const HarmonicModel& m, double t, int order) {
  const double w = m.omega0;
  const double p1 = w * t;
  const double p2 = 2.0 * w * t + m.theta;
  const double b1 = m.beta1();
  const double b2 = m.beta2();
  switch (order) {
    case 0:
      return std::cos(p1) + m.alpha * std::cos(p2);
    case 1:
      return b1 * std::sin(p1) + b2 * std::sin(p2);
    case 2:
      return w * (b1 * std::cos(p1) + 2.0 * b2 * std::cos(p2));
    case 3:
      return -w * w * (b1 * std::sin(p1) + 4.0 * b2 * std::sin(p2));
    default:
      throw InvalidInput("eval_model: derivative order must be in 0..3, got " +
                         std::to_string(order));
  }
}

double default_zero_tolerance(const HarmonicModel& m) {
  const double period = 2.0 * pi / m.omega0;
  constexpr int kScan = 4096;
  double peak = 0.0;
  for (int i = 0; i < kScan; ++i)
    peak = std::max(peak, std::abs(eval_model(m, period * i / kScan, 2)));
  return 1e-9 * peak;
}

RdvConditions rdv_conditions_hold(const HarmonicModel& m, double t) {
  return rdv_conditions_hold(m, t, default_zero_tolerance(m));
}

RdvConditions rdv_conditions_hold(const HarmonicModel& m, double t, double tol_zero) {
  RdvConditions r;
  r.rising = eval_model(m, t, 1) > 0.0;
  r.inflection = std::abs(eval_model(m, t, 2)) < tol_zero;
  r.convex = eval_model(m, t, 3) > 0.0;
  return r;
}

bool harmonic_terms_differ_in_sign(const HarmonicModel& m, double t) {
  const double fundamental = m.beta1() * std::sin(m.omega0 * t);
  const double harmonic = m.beta2() * std::sin(2.0 * m.omega0 * t + m.theta);
  return fundamental > 0.0 && harmonic < 0.0;
}

std::vector<double> inflection_times(const HarmonicModel& m, double t_begin, double t_end,
                                     int per_period) {
  std::vector<double> roots;
  if (!(t_end > t_begin) || per_period < 8) return roots;
  const double step = 2.0 * pi / m.omega0 / per_period;
  auto f = [&](double t) { return eval_model(m, t, 2); };

  double a = t_begin;
  double fa = f(a);
  while (a < t_end) {
    const double b = std::min(a + step, t_end);
    const double fb = f(b);
    if (fa == 0.0) {
      roots.push_back(a);
    } else if ((fa < 0.0) != (fb < 0.0) && fb != 0.0) {
      double lo = a, hi = b, flo = fa;
      for (int it = 0; it < 200 && hi - lo > 1e-15 * std::max(1.0, std::abs(hi)); ++it) {
        const double mid = 0.5 * (lo + hi);
        const double fm = f(mid);
        if (fm == 0.0) {
          lo = hi = mid;
          break;
        }
        if ((fm < 0.0) == (flo < 0.0)) {
          lo = mid;
          flo = fm;
        } else {
          hi = mid;
        }
      }
      roots.push_back(0.5 * (lo + hi));
    }
    if (b >= t_end) break;
    a = b;
    fa = fb;
  }
  return roots;
}

std::vector<double> rdv_times(const HarmonicModel& m, double t_begin, double t_end) {
  std::vector<double> out;
  for (double t : inflection_times(m, t_begin, t_end)) {
    if (eval_model(m, t, 1) > 0.0 && eval_model(m, t, 3) > 0.0) out.push_back(t);
  }
  return out;
}

RhoBounds rho_bounds(double x) {
  if (!(x >= pi && x < 2.0 * pi))
    throw InvalidInput("rho_bounds: phase must lie in [pi, 2 pi)");
  const double c2 = std::cos(x) * std::cos(x);
  return {(1.0 + 3.0 * c2) / 16.0, (4.0 - 3.0 * c2) / 4.0};
}

namespace {

double bound_midpoint(double x) {
  // Same expression as rho_bounds, without its half-open domain check so the
  // trapezoid rule can sample the closing endpoint.
  const double c2 = std::cos(x) * std::cos(x);
  return 0.5 * ((1.0 + 3.0 * c2) / 16.0 + (4.0 - 3.0 * c2) / 4.0);
}

}  // namespace

double mean_rho_squared(int n_points, Quadrature rule) {
  if (n_points < 100) throw InvalidInput("mean_rho_squared: n_points must be >= 100");
  const double h = pi / n_points;
  double sum = 0.0;
  if (rule == Quadrature::midpoint) {
    for (int k = 0; k < n_points; ++k) sum += bound_midpoint(pi + (k + 0.5) * h);
    return sum * h / pi;
  }
  sum = 0.5 * (bound_midpoint(pi) + bound_midpoint(2.0 * pi));
  for (int k = 1; k < n_points; ++k) sum += bound_midpoint(pi + k * h);
  return sum * h / pi;
}

double optimal_gamma(int n_points) { return std::sqrt(mean_rho_squared(n_points)); }

}  // namespace topobeat::model
