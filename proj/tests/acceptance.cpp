// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any FAIL.
// Set TOPOBEAT_DATASET_MANIFEST to a sweep manifest of converted real records
// to also run the optional absolute-value check.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <map>
#include <numbers>
#include <random>
#include <string>

#include "support.hpp"
#include "topobeat/dsp.hpp"
#include "topobeat/features.hpp"
#include "topobeat/harness.hpp"
#include "topobeat/model.hpp"
#include "topobeat/topology.hpp"

using namespace topobeat;
using std::numbers::pi;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

int failures = 0;

void run(int id, const std::string& name, double limit_s, const std::function<Outcome()>& body) {
  const auto t0 = std::chrono::steady_clock::now();
  Outcome o;
  try {
    o = body();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  const bool in_time = limit_s <= 0.0 || secs < limit_s;
  const bool pass = o.pass && in_time;
  if (!pass) ++failures;
  std::printf("%s %d %s: %s (%.2f s%s)\n", pass ? "PASS" : "FAIL", id, name.c_str(), o.detail.c_str(), secs,
              in_time ? "" : ", over time limit");
  std::fflush(stdout);
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

// Largest phase step after unwrapping, over every radar record built below.
double worst_unwrap_step = 0.0;
int unwrap_records = 0;

void track_unwrap(const IQRecord& iq) {
  const auto ph = dsp::unwrap_phase(dsp::extract_phase(dsp::remove_dc(iq)));
  for (std::size_t i = 1; i < ph.size(); ++i)
    worst_unwrap_step = std::max(worst_unwrap_step, std::abs(ph.samples[i] - ph.samples[i - 1]));
  ++unwrap_records;
}

Outcome rho_oracle() {
  const double mean = model::mean_rho_squared(1'000'000);
  const double gamma = model::optimal_gamma();
  const double err = std::abs(mean - 25.0 / 64.0);
  // gamma is the root of a numerical integral; agreement to 1e-12 is exact at double precision.
  const double gerr = std::abs(gamma - 0.625);
  return {err <= 1e-6 && gerr <= 1e-12,
          fmt("mean rho^2 = %.12f (|err| %.2e), gamma = %.12f (|err| %.2e)", mean, err, gamma, gerr)};
}

Outcome fundamental_features() {
  const double f0 = 1.2;
  const model::HarmonicModel m{2.0 * pi * f0, 0.0, 0.0};
  const auto f = features::extract_features(test_support::sample_model(m, 100.0, 14.0 / f0));
  std::map<FeatureKind, int> total;
  for (const auto& p : f) ++total[p.kind];
  const std::vector<FeatureKind> want{FeatureKind::PK, FeatureKind::VL, FeatureKind::RDP, FeatureKind::FDV};
  bool ok = total.size() == want.size();
  for (auto k : want) ok = ok && total.count(k);
  // Features fall on multiples of a quarter period; windows are offset by an
  // eighth so none sits on a boundary. The first and last periods are skipped.
  int periods = 0;
  for (int k = 1; k + 1 < 14; ++k) {
    std::map<FeatureKind, int> c;
    const double lo = (k + 0.125) / f0, hi = (k + 1.125) / f0;
    for (const auto& p : f)
      if (p.tau >= lo && p.tau < hi) ++c[p.kind];
    bool one_each = c.size() == 4;
    for (const auto& [kind, n] : c) one_each = one_each && n == 1;
    ok = ok && one_each;
    ++periods;
  }
  return {ok && periods >= 10, fmt("%zu kinds over %d full periods, one of each per period: %s", total.size(), periods,
                                   ok ? "yes" : "no")};
}

Outcome rdv_conditions() {
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> ua(0.3, 0.9), ut(-pi, pi);
  const double fs = 1000.0;
  int detected = 0, bad = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const model::HarmonicModel m{2.0 * pi * 1.2, ua(rng), ut(rng)};
    const auto f = features::extract_features(test_support::sample_model(m, fs, 5.0));
    const auto infl = model::inflection_times(m, 0.0, 5.0);
    for (const auto& p : f) {
      if (p.kind != FeatureKind::RDV) continue;
      ++detected;
      const auto it = std::min_element(infl.begin(), infl.end(),
                                       [&](double a, double b) { return std::abs(a - p.tau) < std::abs(b - p.tau); });
      if (it == infl.end() || std::abs(*it - p.tau) > 1.0 / fs || !model::rdv_conditions_hold(m, *it).all() ||
          !model::harmonic_terms_differ_in_sign(m, *it))
        ++bad;
    }
  }
  return {detected > 0 && bad == 0, fmt("%d RDVs detected across 100 models, %d violate a condition", detected, bad)};
}

Outcome correlation_properties() {
  auto sc = test_support::drifting_scene(test_support::regular_beats(0.2, 0.83, 90.0), 90.0, 0.5, -0.7);
  sc.fs = 200.0;
  sc.alpha_jitter = 0.1;
  sc.noise_bandwidth = 8.0;
  sc.noise_std = model::noise_std_for_snr(sc, 15.0);
  const auto w = dsp::preprocess_displacement(model::synthesize(sc, 11).displacement, {});
  const auto f = features::extract_features(w);
  const topology::AssignmentTable table(0.625);
  const auto s = topology::assign_signal(f, table, w);
  const auto s_rot = topology::assign_signal(f, table.rotated(1.3), w);
  std::mt19937_64 rng(99);
  std::uniform_int_distribution<std::size_t> pick(0, f.size() - 1);
  int pairs = 0, bad = 0;
  double worst_rot = 0.0;
  constexpr double tol = 1e-12;
  while (pairs < 1000) {
    const double a = f[pick(rng)].tau, b = f[pick(rng)].tau;
    const auto c1 = topology::ordinary_corr(w, a, b, 0.5), c2 = topology::ordinary_corr(w, b, a, 0.5);
    const auto q1 = topology::topology_corr(s, a, b, 0.5), q2 = topology::topology_corr(s, b, a, 0.5);
    const auto qr = topology::topology_corr(s_rot, a, b, 0.5);
    if (!c1 || !c2 || !q1 || !q2 || !qr) continue;
    ++pairs;
    worst_rot = std::max(worst_rot, std::abs(*q1 - *qr));
    if (*c1 < -1.0 - tol || *c1 > 1.0 + tol || *q1 < -tol || *q1 > 1.0 + tol || std::abs(*c1 - *c2) > tol ||
        std::abs(*q1 - *q2) > tol || std::abs(*q1 - *qr) > tol)
      ++bad;
  }
  return {bad == 0, fmt("%d pairs, %d violations, max |q - q_rot| = %.1e", pairs, bad, worst_rot)};
}

Outcome end_to_end() {
  model::BeatWalk walk;
  walk.duration = 120.0;
  walk.ibi_lo = 0.7;
  walk.ibi_hi = 0.9;
  auto sc = test_support::drifting_scene(model::random_walk_beats(walk, 500), 120.0, 0.4, 1.0);
  sc.noise_bandwidth = 2.0;
  sc.noise_std = model::noise_std_for_snr(sc, 20.0);
  const auto rec = model::synthesize(sc, 40);
  track_unwrap(rec.iq);
  const auto r = harness::run_record(rec.iq, metrics::ReferenceBeats(rec.beat_times), 0.625, {});
  const double rms = r.rms_ms.value_or(INFINITY);
  return {rms < 15.0 && r.tcr > 0.85,
          fmt("RMS %.2f ms (< 15), TCR %.3f (> 0.85), %zu estimates", rms, r.tcr, r.n_estimates)};
}

std::vector<harness::PreparedRecord> cohort;

const std::vector<harness::PreparedRecord>& prepared_cohort() {
  if (cohort.empty()) {
    for (const auto& rec : test_support::jittered_cohort()) {
      track_unwrap(rec.iq);
      cohort.push_back(harness::prepare_record(rec.iq, metrics::ReferenceBeats(rec.beat_times), {}));
    }
  }
  return cohort;
}

double rms_at(const harness::SweepResult& s, double g) {
  for (const auto& a : s.aggregates)
    if (a.gamma == g) return a.rms_ms.mean;
  return NAN;
}

Outcome gamma_ordering() {
  const auto& recs = prepared_cohort();
  const auto grid = harness::default_gamma_grid();
  const auto sweep = harness::run_sweep(recs, grid, {});
  double neg = 0.0, pos = 0.0;
  int nn = 0, np = 0;
  bool complete = true;
  for (const auto& a : sweep.aggregates) {
    complete = complete && a.rms_ms.n == recs.size();
    (a.gamma < 0.0 ? neg : pos) += a.rms_ms.mean;
    ++(a.gamma < 0.0 ? nn : np);
  }
  neg /= nn;
  pos /= np;
  const double r625 = rms_at(sweep, 0.625), r0 = rms_at(sweep, 0.0), rm5 = rms_at(sweep, -0.5);
  const bool ok = complete && r625 < r0 && r0 < rm5 && pos < neg;
  return {ok, fmt("RMS(0.625) %.2f < RMS(0) %.2f < RMS(-0.5) %.2f ms; half means gamma>=0 %.2f < gamma<0 %.2f ms",
                  r625, r0, rm5, pos, neg)};
}

Outcome monte_carlo() {
  const auto& recs = prepared_cohort();
  const std::span<const harness::PreparedRecord> one(recs.data(), 1);
  const auto mc = harness::monte_carlo_gamma(one, {}, 100, 7);
  const double ref = harness::evaluate_prepared(recs[0], 0.625, {}).rms_ms.value_or(INFINITY);
  return {mc.summary.n == 100 && mc.summary.mean > ref,
          fmt("random gamma %.2f +/- %.2f ms over %zu trials > RMS(0.625) %.2f ms", mc.summary.mean, mc.summary.std,
              mc.summary.n, ref)};
}

Outcome dsp_chain() {
  const double fs = 100.0;
  const auto h = dsp::design_fir({}, fs);
  const double dc_db = 20.0 * std::log10(std::max(std::abs(dsp::frequency_response(h, 0.0, fs)), 1e-300));

  std::vector<double> x(static_cast<std::size_t>(120.0 * fs));
  for (std::size_t i = 0; i < x.size(); ++i) x[i] = std::sin(2.0 * pi * 1.2 * static_cast<double>(i) / fs);
  const auto in = Waveform::make(x, fs);
  const auto y = dsp::apply_fir_zero_delay(in, h);
  const int max_lag = 20;
  std::vector<double> xc;
  for (int lag = -max_lag; lag <= max_lag; ++lag) {
    double s = 0.0;
    for (std::size_t i = y.valid_begin + max_lag; i + max_lag < y.valid_end; ++i)
      s += x[i] * y.samples[static_cast<std::size_t>(static_cast<long>(i) + lag)];
    xc.push_back(s);
  }
  const auto k = static_cast<std::size_t>(std::max_element(xc.begin(), xc.end()) - xc.begin());
  const double lag = test_support::parabolic_peak(xc, k) - max_lag;

  prepared_cohort();
  const bool ok = dc_db <= -60.0 && std::abs(lag) <= 1.0 && unwrap_records > 0 && worst_unwrap_step < pi;
  return {ok, fmt("HPF %zu taps, DC %.1f dB; 1.2 Hz tone lag %.3f samples; max unwrap step %.3f rad over %d records",
                  h.size(), dc_db, lag, worst_unwrap_step, unwrap_records)};
}

Outcome dataset_check(const std::string& manifest) {
  harness::SweepSpec spec;
  spec.records = io::load_manifest(manifest);
  spec.gamma_values = {0.5, 0.625};
  const auto s = harness::run_sweep(spec);
  const double r5 = rms_at(s, 0.5), r625 = rms_at(s, 0.625);
  return {std::abs(r625 - 54.0) <= 20.0 && std::abs(r5 - r625) <= 5.0,
          fmt("RMS(0.625) %.1f ms (54 +/- 20), RMS(0.5) %.1f ms (within 5)", r625, r5)};
}

}  // namespace

int main() {
  run(1, "mean rho^2 oracle", 1.0, rho_oracle);
  run(2, "fundamental-wave feature set", 1.0, fundamental_features);
  run(3, "RDV sign conditions", 10.0, rdv_conditions);
  run(4, "correlation bounds and symmetries", 0.0, correlation_properties);
  run(5, "end-to-end IBI recovery", 30.0, end_to_end);
  run(6, "gamma ordering on a synthetic cohort", 300.0, gamma_ordering);
  run(7, "Monte Carlo gamma baseline", 300.0, monte_carlo);
  run(8, "DSP chain", 0.0, dsp_chain);
  if (const char* m = std::getenv("TOPOBEAT_DATASET_MANIFEST"); m && *m)
    run(6, "optional dataset check", 0.0, [&] { return dataset_check(m); });
  else
    std::printf("SKIP 6 optional dataset check: TOPOBEAT_DATASET_MANIFEST not set\n");
  return failures == 0 ? 0 : 1;
}
