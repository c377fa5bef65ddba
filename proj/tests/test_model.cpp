#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "topobeat/error.hpp"
#include "topobeat/model.hpp"

using namespace topobeat;
using model::HarmonicModel;
using std::numbers::pi;

namespace {

// Independent closed-form oracle for the time average of the bound midpoint:
// Simpson's rule on a fine grid of the integrand written out directly.
double simpson_mean_midpoint(int n) {
  auto f = [](double x) {
    const double c2 = std::cos(x) * std::cos(x);
    return 0.5 * ((1.0 + 3.0 * c2) / 16.0 + (4.0 - 3.0 * c2) / 4.0);
  };
  const double h = pi / n;
  double s = f(pi) + f(2.0 * pi);
  for (int i = 1; i < n; ++i) s += (i % 2 ? 4.0 : 2.0) * f(pi + i * h);
  return s * h / 3.0 / pi;
}

}  // namespace

TEST_CASE("eval_model order 0 at the origin") {
  HarmonicModel m{2.0 * pi, 0.0, 0.0};
  CHECK(model::eval_model(m, 0.0, 0) == doctest::Approx(1.0));
}

TEST_CASE("pure fundamental: third derivative is -omega0^2 times the first") {
  HarmonicModel m{2.0 * pi, 0.0, 0.0};
  for (double t = 0.0; t < 2.0; t += 0.0137) {
    const double d1 = model::eval_model(m, t, 1);
    const double d3 = model::eval_model(m, t, 3);
    CHECK(d3 == doctest::Approx(-m.omega0 * m.omega0 * d1).epsilon(1e-12).scale(1.0));
  }
}

TEST_CASE("each derivative order matches a central difference of the order below") {
  HarmonicModel m{2.0 * pi, 0.3, 1.0};
  const double h = 1e-5;
  const double t = 0.2;
  const double fd2 = (model::eval_model(m, t + h, 1) - model::eval_model(m, t - h, 1)) / (2 * h);
  CHECK(std::abs(model::eval_model(m, t, 2) - fd2) < 1e-4);

  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> ut(0.0, 3.0);
  for (int k = 0; k < 50; ++k) {
    const double tk = ut(rng);
    for (int order = 1; order <= 3; ++order) {
      const double fd = (model::eval_model(m, tk + h, order - 1) - model::eval_model(m, tk - h, order - 1)) / (2 * h);
      const double scale = std::pow(m.omega0, order);
      CHECK(std::abs(model::eval_model(m, tk, order) - fd) < 1e-6 * scale);
    }
  }
}

TEST_CASE("eval_model rejects an unsupported derivative order") {
  HarmonicModel m;
  CHECK_THROWS_AS(model::eval_model(m, 0.0, 4), InvalidInput);
  CHECK_THROWS_AS(model::eval_model(m, 0.0, -1), InvalidInput);
}

TEST_CASE("harmonic model validation and derived coefficients") {
  CHECK_THROWS_AS((HarmonicModel{0.0, 0.2, 0.0}.validate()), InvalidInput);
  CHECK_THROWS_AS((HarmonicModel{1.0, 1.0, 0.0}.validate()), InvalidInput);
  CHECK_THROWS_AS((HarmonicModel{1.0, -0.1, 0.0}.validate()), InvalidInput);
  CHECK_NOTHROW((HarmonicModel{1.0, 0.0, 0.0}.validate()));

  HarmonicModel m{3.0, 0.45, 0.7};
  CHECK(m.beta1() == -3.0);
  CHECK(m.beta2() == doctest::Approx(-2.0 * 3.0 * 0.45));
  CHECK(m.rho() == doctest::Approx(std::abs(m.beta2() / m.beta1())));

  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> ua(0.0, std::nextafter(1.0, 0.0));
  for (int k = 0; k < 1000; ++k) CHECK(HarmonicModel{1.0, ua(rng), 0.0}.rho() < 2.0);
}

TEST_CASE("first derivative splits into fundamental and harmonic terms") {
  HarmonicModel m{2.0 * pi * 1.1, 0.6, -0.4};
  for (double t = 0.0; t < 1.0; t += 0.031) {
    const double split = m.beta1() * std::sin(m.omega0 * t) + m.beta2() * std::sin(2 * m.omega0 * t + m.theta);
    CHECK(model::eval_model(m, t, 1) == doctest::Approx(split).epsilon(1e-12).scale(m.omega0));
  }
}

TEST_CASE("pure fundamental: first and third derivatives never share a sign") {
  HarmonicModel m{2.0 * pi * 1.3, 0.0, 0.0};
  for (int i = 0; i < 20000; ++i) {
    const double t = i * 1e-4;
    const double d1 = model::eval_model(m, t, 1);
    if (d1 == 0.0) continue;
    CHECK(d1 * model::eval_model(m, t, 3) < 0.0);
  }
}

TEST_CASE("RDV conditions never hold without a harmonic") {
  HarmonicModel m{2.0 * pi, 0.0, 0.0};
  for (int i = 0; i < 5000; ++i) CHECK_FALSE(model::rdv_conditions_hold(m, i * 2e-4).all());
  // The inflections themselves exist but are all RDP/FDV.
  const auto infl = model::inflection_times(m, 0.0, 5.0);
  CHECK(infl.size() == 10);
  for (double t : infl) CHECK_FALSE(model::rdv_conditions_hold(m, t).all());
  CHECK(model::rdv_times(m, 0.0, 5.0).empty());
}

TEST_CASE("inflection times of a pure cosine sit at quarter periods") {
  HarmonicModel m{2.0 * pi * 0.8, 0.0, 0.0};
  const auto infl = model::inflection_times(m, 0.0, 5.0);
  REQUIRE(!infl.empty());
  for (double t : infl) {
    const double x = m.omega0 * t - pi / 2;
    CHECK(std::abs(std::remainder(x, pi)) < 1e-9);
  }
}

TEST_CASE("analytic RDV instants satisfy all conditions and the sign split") {
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> ua(0.3, 0.9), uth(-pi, pi);
  int total = 0;
  for (int k = 0; k < 40; ++k) {
    HarmonicModel m{2.0 * pi, ua(rng), uth(rng)};
    for (double t : model::rdv_times(m, 0.0, 3.0)) {
      ++total;
      const auto c = model::rdv_conditions_hold(m, t);
      CHECK(c.rising);
      CHECK(c.inflection);
      CHECK(c.convex);
      CHECK(m.beta1() * std::sin(m.omega0 * t) > 0.0);
      CHECK(m.beta2() * std::sin(2 * m.omega0 * t + m.theta) < 0.0);
      CHECK(model::harmonic_terms_differ_in_sign(m, t));
    }
  }
  CHECK(total > 0);
}

TEST_CASE("zero tolerance scales with the second derivative peak") {
  HarmonicModel a{2.0 * pi, 0.4, 1.0};
  HarmonicModel b{4.0 * pi, 0.4, 1.0};
  CHECK(model::default_zero_tolerance(b) == doctest::Approx(4.0 * model::default_zero_tolerance(a)).epsilon(1e-3));
  CHECK(model::default_zero_tolerance(a) > 0.0);
}

TEST_CASE("rho bounds") {
  auto b = model::rho_bounds(1.5 * pi);
  CHECK(b.lower == doctest::Approx(1.0 / 16.0));
  CHECK(b.upper == doctest::Approx(1.0));
  b = model::rho_bounds(pi);
  CHECK(b.lower == doctest::Approx(0.25));
  CHECK(b.upper == doctest::Approx(0.25));

  CHECK_THROWS_AS(model::rho_bounds(pi - 1e-9), InvalidInput);
  CHECK_THROWS_AS(model::rho_bounds(2.0 * pi), InvalidInput);

  double prev_lo = model::rho_bounds(pi).lower;
  double prev_hi = model::rho_bounds(pi).upper;
  for (int i = 1; i < 10000; ++i) {
    const double x = pi + pi * i / 10000.0;
    const auto r = model::rho_bounds(x);
    const double c2 = std::cos(x) * std::cos(x);
    if (c2 < 1.0 - 1e-12) CHECK(r.lower < r.upper);
    CHECK(std::abs(r.lower - prev_lo) < 1e-3);
    CHECK(std::abs(r.upper - prev_hi) < 1e-3);
    prev_lo = r.lower;
    prev_hi = r.upper;
  }
}

TEST_CASE("mean rho squared converges to 25/64") {
  const double exact = 25.0 / 64.0;
  CHECK(std::abs(simpson_mean_midpoint(2000) - exact) < 1e-12);
  CHECK(std::abs(model::mean_rho_squared(1'000'000) - exact) < 1e-6);

  for (int n : {1000, 10000, 100000}) {
    const double mid = model::mean_rho_squared(n, model::Quadrature::midpoint);
    const double trap = model::mean_rho_squared(n, model::Quadrature::trapezoid);
    CHECK(std::abs(mid - trap) < 1e-8);
    CHECK(std::abs(mid - simpson_mean_midpoint(2000)) <= 1.0 / n);
  }
  double prev = 1.0;
  for (int n : {1000, 10000, 100000}) {
    const double err = std::abs(model::mean_rho_squared(n, model::Quadrature::trapezoid) - exact);
    CHECK(err <= prev + 1e-14);  // the integrand is a trig polynomial; both rules hit round-off early
    prev = err;
  }
  CHECK_THROWS_AS(model::mean_rho_squared(99), InvalidInput);
}

TEST_CASE("optimal gamma is five eighths") {
  CHECK(model::optimal_gamma() == doctest::Approx(0.625).epsilon(1e-6));
}
