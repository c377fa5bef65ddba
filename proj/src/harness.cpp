#include "topobeat/harness.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <ostream>
#include <random>

#include "topobeat/error.hpp"

namespace topobeat::harness {

Waveform condition(const io::RecordInput& input, const dsp::PreprocessOptions& opts) {
  if (const auto* iq = std::get_if<IQRecord>(&input)) return dsp::preprocess(*iq, opts);
  return std::get<Waveform>(input);
}

PreparedRecord prepare_record(const io::RecordInput& input, metrics::ReferenceBeats ref,
                              const PipelineConfig& cfg, std::string id) {
  try {
    PreparedRecord rec;
    rec.id = id;
    rec.signal = condition(input, cfg.dsp);
    rec.features = features::extract_features(rec.signal, cfg.features);
    rec.ref = std::move(ref);
    const Waveform& s = rec.signal;
    rec.t_start = s.time_at(static_cast<double>(s.valid_begin));
    rec.t_all = static_cast<double>(s.valid_end - s.valid_begin) / s.fs;
    return rec;
  } catch (const std::exception& e) {
    throw InvalidInput(id + ": " + e.what());
  }
}

std::vector<topology::IbiEstimate> estimate(const PreparedRecord& rec, double gamma,
                                            const topology::TopologyParams& p) {
  return topology::estimate_ibis(rec.signal, rec.features, topology::AssignmentTable(gamma), p);
}

metrics::EvalReport evaluate_prepared(const PreparedRecord& rec, double gamma, const PipelineConfig& cfg) {
  const auto est = estimate(rec, gamma, cfg.topology);
  return metrics::evaluate(est, rec.ref, cfg.tcr, rec.t_all, rec.t_start);
}

metrics::EvalReport run_record(const io::RecordInput& input, const metrics::ReferenceBeats& ref,
                               double gamma, const PipelineConfig& cfg) {
  return evaluate_prepared(prepare_record(input, ref, cfg), gamma, cfg);
}

std::vector<double> gamma_grid(double lo, double hi, double step) {
  if (!(step > 0.0) || !(hi >= lo) || !std::isfinite(lo) || !std::isfinite(hi))
    throw InvalidInput("gamma grid: need finite lo <= hi and step > 0");
  std::vector<double> out;
  const auto n = static_cast<long>(std::floor((hi - lo) / step + 1e-9));
  for (long k = 0; k <= n; ++k) out.push_back(lo + static_cast<double>(k) * step);
  return out;
}

std::vector<double> default_gamma_grid() { return gamma_grid(-2.0, 2.0, 0.125); }

std::vector<GammaAggregate> aggregate(std::span<const SweepCell> cells, std::span<const double> gammas) {
  std::vector<GammaAggregate> out;
  for (double g : gammas) {
    std::vector<double> rms, tcr;
    GammaAggregate agg;
    agg.gamma = g;
    for (const auto& c : cells) {
      if (c.gamma != g) continue;
      if (!c.report) {
        ++agg.failed;
        continue;
      }
      if (!c.report->rms_ms) continue;
      rms.push_back(*c.report->rms_ms);
      tcr.push_back(c.report->tcr);
    }
    agg.rms_ms = metrics::summarize(rms);
    agg.tcr = metrics::summarize(tcr);
    out.push_back(agg);
  }
  return out;
}

SweepResult run_sweep(std::span<const PreparedRecord> records, std::span<const double> gammas,
                      const PipelineConfig& cfg) {
  if (gammas.empty()) throw InvalidInput("run_sweep: gamma grid is empty");
  for (double g : gammas)
    if (!std::isfinite(g)) throw InvalidInput("run_sweep: gamma values must be finite");
  SweepResult result;
  for (double g : gammas) {
    for (const auto& rec : records) {
      SweepCell cell;
      cell.gamma = g;
      cell.record = rec.id;
      try {
        cell.report = evaluate_prepared(rec, g, cfg);
      } catch (const std::exception& e) {
        cell.error = e.what();
      }
      result.cells.push_back(std::move(cell));
    }
  }
  result.aggregates = aggregate(result.cells, gammas);
  return result;
}

SweepResult run_sweep(const SweepSpec& spec) {
  std::vector<std::future<PreparedRecord>> jobs;
  for (const auto& src : spec.records) {
    jobs.push_back(std::async(std::launch::async, [&spec, src] {
      return prepare_record(io::load_record(src.record_path), io::load_ref(src.ref_path), spec.config,
                            src.record_path);
    }));
  }
  std::vector<PreparedRecord> ok;
  std::vector<std::pair<std::string, std::string>> failed;
  for (std::size_t i = 0; i < jobs.size(); ++i) {
    try {
      ok.push_back(jobs[i].get());
    } catch (const std::exception& e) {
      failed.emplace_back(spec.records[i].record_path, e.what());
    }
  }
  SweepResult result = run_sweep(ok, spec.gamma_values, spec.config);
  if (!failed.empty()) {
    // Re-assemble so every (gamma, record) pair has a cell, in input order.
    std::vector<SweepCell> cells;
    std::size_t k = 0;
    for (double g : spec.gamma_values) {
      for (const auto& src : spec.records) {
        const auto f = std::find_if(failed.begin(), failed.end(),
                                    [&](const auto& p) { return p.first == src.record_path; });
        if (f != failed.end()) {
          cells.push_back({g, src.record_path, std::nullopt, f->second});
        } else {
          cells.push_back(std::move(result.cells[k++]));
        }
      }
    }
    result.cells = std::move(cells);
    result.aggregates = aggregate(result.cells, spec.gamma_values);
  }
  return result;
}

MonteCarloResult monte_carlo_gamma(std::span<const PreparedRecord> records, const PipelineConfig& cfg,
                                   int trials, std::uint64_t seed, double lo, double hi) {
  if (trials < 1) throw InvalidInput("monte_carlo_gamma: trials must be >= 1");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> draw(lo, hi);
  MonteCarloResult out;
  for (int t = 0; t < trials; ++t) {
    const double g = draw(rng);
    std::vector<double> rms;
    for (const auto& rec : records) {
      const auto report = evaluate_prepared(rec, g, cfg);
      if (report.rms_ms) rms.push_back(*report.rms_ms);
    }
    out.gammas.push_back(g);
    out.rms_ms.push_back(rms.empty() ? std::nan("") : metrics::summarize(rms).mean);
  }
  std::vector<double> defined;
  for (double r : out.rms_ms)
    if (std::isfinite(r)) defined.push_back(r);
  out.summary = metrics::summarize(defined);
  return out;
}

void write_sweep_csv(std::ostream& out, const SweepResult& result) {
  out << "gamma,rms_mean,rms_std,tcr_mean,tcr_std\n";
  for (const auto& a : result.aggregates) {
    out << io::format_double(a.gamma) << ',';
    if (a.rms_ms.n > 0)
      out << io::format_double(a.rms_ms.mean) << ',' << io::format_double(a.rms_ms.std) << ','
          << io::format_double(a.tcr.mean) << ',' << io::format_double(a.tcr.std);
    else
      out << ",,,";
    out << '\n';
  }
}

void write_cells_csv(std::ostream& out, const SweepResult& result) {
  out << "gamma,record,rms_ms,tcr,n_estimates,excluded,error\n";
  for (const auto& c : result.cells) {
    out << io::format_double(c.gamma) << ',' << c.record << ',';
    if (c.report) {
      if (c.report->rms_ms) out << io::format_double(*c.report->rms_ms);
      out << ',' << io::format_double(c.report->tcr) << ',' << c.report->n_estimates << ','
          << c.report->excluded << ',';
    } else {
      std::string msg = c.error;
      for (char& ch : msg)
        if (ch == ',' || ch == '\n') ch = ';';
      out << ",,,," << msg;
    }
    out << '\n';
  }
}

const std::vector<std::string>& pipeline_keys() {
  static const std::vector<std::string> keys = {
      "gamma",     "tc",           "tt",          "cth",       "qth",      "ibi_min",
      "ibi_max",   "hpf_cutoff",   "hpf_atten_db", "hpf_transition", "hpf_max_taps", "decim",
      "min_sep",   "eps_ms",       "dt_tcr",      "gamma_min", "gamma_max", "gamma_step",
      "monte_carlo", "seed"};
  return keys;
}

const std::vector<std::string>& scene_keys() {
  static const std::vector<std::string> keys = {
      "duration",      "fs",           "first_beat",     "ibi_start",      "ibi_lo",
      "ibi_hi",        "ibi_step_std", "ibi_min",        "ibi_max",        "alpha",
      "theta",         "alpha_jitter", "theta_jitter",   "heart_amp",      "respiration_amp",
      "respiration_freq", "drift_poly", "drift_walk_std", "noise_std",     "snr_db",
      "noise_bandwidth", "wavelength",  "distance",       "iq_amplitude",  "clutter_i",
      "clutter_q",     "seed",         "label"};
  return keys;
}

void apply_config(const Config& cfg, PipelineConfig& out) {
  auto& t = out.topology;
  t.t_c = cfg.get_double("tc", t.t_c);
  t.t_t = cfg.get_double("tt", t.t_t);
  t.c_th = cfg.get_double("cth", t.c_th);
  t.q_th = cfg.get_double("qth", t.q_th);
  t.ibi_min = cfg.get_double("ibi_min", t.ibi_min);
  t.ibi_max = cfg.get_double("ibi_max", t.ibi_max);
  auto& h = out.dsp.hpf;
  h.cutoff_hz = cfg.get_double("hpf_cutoff", h.cutoff_hz);
  h.stopband_atten_db = cfg.get_double("hpf_atten_db", h.stopband_atten_db);
  h.transition_hz = cfg.get_double("hpf_transition", h.transition_hz);
  h.max_taps = static_cast<std::size_t>(cfg.get_int("hpf_max_taps", static_cast<long>(h.max_taps)));
  out.dsp.decim = static_cast<int>(cfg.get_int("decim", out.dsp.decim));
  out.features.min_sep = static_cast<std::size_t>(cfg.get_int("min_sep", static_cast<long>(out.features.min_sep)));
  out.tcr.eps_ms = cfg.get_double("eps_ms", out.tcr.eps_ms);
  out.tcr.dt_tcr = cfg.get_double("dt_tcr", out.tcr.dt_tcr);
}

SceneConfig scene_from_config(const Config& cfg) {
  SceneConfig sc;
  sc.seed = static_cast<std::uint64_t>(cfg.get_int("seed", 1));
  model::BeatWalk walk;
  walk.duration = cfg.get_double("duration", walk.duration);
  walk.first_beat = cfg.get_double("first_beat", walk.first_beat);
  walk.ibi_start = cfg.get_double("ibi_start", walk.ibi_start);
  walk.ibi_lo = cfg.get_double("ibi_lo", walk.ibi_lo);
  walk.ibi_hi = cfg.get_double("ibi_hi", walk.ibi_hi);
  walk.step_std = cfg.get_double("ibi_step_std", walk.step_std);

  auto& s = sc.scene;
  // Beat-time walk and waveform draw from independent streams of the same seed.
  s.beat_times = model::random_walk_beats(walk, sc.seed ^ 0x9E3779B97F4A7C15ULL);
  s.duration = walk.duration;
  s.fs = cfg.get_double("fs", s.fs);
  s.ibi_min = cfg.get_double("ibi_min", s.ibi_min);
  s.ibi_max = cfg.get_double("ibi_max", s.ibi_max);
  s.harmonic.alpha = cfg.get_double("alpha", s.harmonic.alpha);
  s.harmonic.theta = cfg.get_double("theta", s.harmonic.theta);
  s.alpha_jitter = cfg.get_double("alpha_jitter", s.alpha_jitter);
  s.theta_jitter = cfg.get_double("theta_jitter", s.theta_jitter);
  s.heart_amp = cfg.get_double("heart_amp", s.heart_amp);
  s.respiration_amp = cfg.get_double("respiration_amp", s.respiration_amp);
  s.respiration_freq = cfg.get_double("respiration_freq", s.respiration_freq);
  s.motion_drift.poly = cfg.get_doubles("drift_poly");
  s.motion_drift.walk_std = cfg.get_double("drift_walk_std", 0.0);
  s.noise_bandwidth = cfg.get_double("noise_bandwidth", s.noise_bandwidth);
  s.noise_std = cfg.get_double("noise_std", s.noise_std);
  if (cfg.has("snr_db")) s.noise_std = model::noise_std_for_snr(s, cfg.get_double("snr_db", 0.0));
  s.wavelength = cfg.get_double("wavelength", s.wavelength);
  s.distance = cfg.get_double("distance", s.distance);
  s.iq_amplitude = cfg.get_double("iq_amplitude", s.iq_amplitude);
  s.clutter = {cfg.get_double("clutter_i", 0.0), cfg.get_double("clutter_q", 0.0)};
  return sc;
}

}  // namespace topobeat::harness
