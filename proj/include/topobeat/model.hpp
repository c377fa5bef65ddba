#pragma once

#include <vector>

namespace topobeat::model {

/// Two-harmonic heartbeat displacement
///   s(t) = cos(omega0 t) + alpha cos(2 omega0 t + theta).
struct HarmonicModel {
  double omega0 = 2.0 * 3.14159265358979323846;
  double alpha = 0.0;
  double theta = 0.0;

  /// Throws InvalidInput unless omega0 > 0 and 0 <= alpha < 1.
  void validate() const;

  /// Coefficients of the first derivative, s'(t) = b1 sin(w t) + b2 sin(2 w t + theta).
  double beta1() const noexcept { return -omega0; }
  double beta2() const noexcept { return -2.0 * omega0 * alpha; }
  /// |beta2 / beta1| = 2 alpha.
  double rho() const noexcept { return 2.0 * alpha; }
};

/// Closed-form derivative of the model of the given order (0..3).
double eval_model(const HarmonicModel& m, double t, int order);

/// Which of the three RDV-defining conditions hold at time t:
///   rising:     s'(t)  > 0
///   inflection: |s''(t)| < tol_zero
///   convex:     s'''(t) > 0
struct RdvConditions {
  bool rising = false;
  bool inflection = false;
  bool convex = false;

  bool all() const noexcept { return rising && inflection && convex; }
};

/// 1e-9 times max |s''| over one period (dense scan).
double default_zero_tolerance(const HarmonicModel& m);

RdvConditions rdv_conditions_hold(const HarmonicModel& m, double t);
RdvConditions rdv_conditions_hold(const HarmonicModel& m, double t, double tol_zero);

/// Sign split of s'(t) into fundamental and second-harmonic terms:
/// true when beta1 sin(w t) > 0 and beta2 sin(2 w t + theta) < 0.
bool harmonic_terms_differ_in_sign(const HarmonicModel& m, double t);

/// Roots of s''(t) in [t_begin, t_end), located by sign-change bracketing on
/// a grid of `per_period` points per period and refined by bisection.
std::vector<double> inflection_times(const HarmonicModel& m, double t_begin, double t_end,
                                     int per_period = 4096);

/// Roots of s''(t) in [t_begin, t_end) that satisfy all RDV conditions.
std::vector<double> rdv_times(const HarmonicModel& m, double t_begin, double t_end);

struct RhoBounds {
  double lower = 0.0;
  double upper = 0.0;
};

/// Admissible range of rho^2 at an RDV with phase x = omega0 t in [pi, 2 pi):
/// ((1 + 3cos^2 x) / 16, (4 - 3cos^2 x) / 4).
RhoBounds rho_bounds(double x);

enum class Quadrature { midpoint, trapezoid };

/// Time average over x in [pi, 2 pi) of the midpoint of rho_bounds(x), i.e. the
/// mean of rho^2 under the assumption that rho^2 is uniformly distributed
/// between its bounds. That assumption is taken as given, not derived.
/// Exact value 25/64. Requires n_points >= 100.
double mean_rho_squared(int n_points, Quadrature rule = Quadrature::midpoint);

/// sqrt(mean_rho_squared(n_points)); the inflection-point assignment magnitude.
double optimal_gamma(int n_points = 1'000'000);

}  // namespace topobeat::model
