// topobeat: batch CLI over the library. Errors go to stderr as one JSON object
// and the process exits nonzero (2 usage, 3 bad input, 1 anything else).

#include <cstdint>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "topobeat/config.hpp"
#include "topobeat/error.hpp"
#include "topobeat/harness.hpp"
#include "topobeat/io.hpp"

using namespace topobeat;

namespace {

// Named flags that map one-to-one onto config keys. Values stay strings so
// the config parser does all number validation.
struct FlagSet {
  std::map<std::string, std::string> values;  // config key -> value
  std::vector<std::string> sets;              // --set key=value

  void add(CLI::App* app, const std::string& flag, const std::string& key, const std::string& help) {
    app->add_option_function<std::string>(
        flag, [this, key](const std::string& v) { values[key] = v; }, help);
  }
};

struct Common {
  std::string config_path;
  FlagSet flags;

  void attach(CLI::App* app) {
    app->add_option("--config", config_path, "key = value file; flags override it")->check(CLI::ExistingFile);
    app->add_option("--set", flags.sets, "override any config key (key=value), repeatable");
  }

  Config resolve() const {
    Config cfg;
    if (!config_path.empty()) cfg = Config::load(config_path);
    for (const auto& kv : flags.sets) {
      const auto eq = kv.find('=');
      if (eq == std::string::npos || eq == 0) throw InvalidInput("--set expects key=value, got '" + kv + "'");
      cfg.set(kv.substr(0, eq), kv.substr(eq + 1));
    }
    for (const auto& [k, v] : flags.values) cfg.set(k, v);
    std::vector<std::string> known = harness::pipeline_keys();
    const auto& scene = harness::scene_keys();
    known.insert(known.end(), scene.begin(), scene.end());
    if (const auto unknown = cfg.unknown_keys(known); !unknown.empty())
      throw InvalidInput("unknown config key '" + unknown.front() + "'");
    return cfg;
  }

  harness::PipelineConfig pipeline() const {
    harness::PipelineConfig p;
    harness::apply_config(resolve(), p);
    return p;
  }
};

void add_dsp_flags(CLI::App* app, FlagSet& f) {
  f.add(app, "--hpf-cutoff", "hpf_cutoff", "high-pass -6 dB frequency, Hz (0.5)");
  f.add(app, "--hpf-atten-db", "hpf_atten_db", "stopband attenuation, dB (60)");
  f.add(app, "--hpf-transition", "hpf_transition", "transition width, Hz (0.2)");
  f.add(app, "--decim", "decim", "decimation factor; 0 picks the one nearest 100 Hz (0)");
}

void add_topology_flags(CLI::App* app, FlagSet& f) {
  f.add(app, "--tc", "tc", "ordinary correlation window, s (0.5)");
  f.add(app, "--tt", "tt", "topology correlation window, s (0.5)");
  f.add(app, "--cth", "cth", "ordinary correlation threshold (0.7)");
  f.add(app, "--qth", "qth", "topology correlation threshold (0.5)");
  f.add(app, "--ibi-min", "ibi_min", "shortest accepted interval, s (0.4)");
  f.add(app, "--ibi-max", "ibi_max", "longest accepted interval, s (1.2)");
  f.add(app, "--min-sep", "min_sep", "feature debounce distance, samples (2)");
}

void add_metric_flags(CLI::App* app, FlagSet& f) {
  f.add(app, "--eps-ms", "eps_ms", "TCR accuracy threshold, ms (50)");
  f.add(app, "--dt-tcr", "dt_tcr", "TCR interval length, s (1.0)");
}

// Writes to `path`, or stdout when empty or "-".
template <class Fn>
void emit(const std::string& path, Fn&& write) {
  if (path.empty() || path == "-") {
    write(std::cout);
    std::cout.flush();
  } else {
    auto out = io::open_output(path);
    write(out);
    if (!out) throw InvalidInput("failed writing '" + path + "'");
  }
}

int fail(const std::string& type, const std::string& message, int code, std::optional<std::size_t> line = {}) {
  nlohmann::json j = {{"error", {{"type", type}, {"message", message}}}};
  if (line) j["error"]["line"] = *line;
  std::cerr << j.dump() << '\n';
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Heartbeat-interval estimation from radar displacement (topology method)"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "topobeat 1.0.0");

  // synth
  Common synth_c;
  std::string synth_out, synth_ref, synth_disp;
  auto* synth = app.add_subcommand("synth", "generate a synthetic IQ record and its reference beats");
  synth_c.attach(synth);
  synth->add_option("-o,--out", synth_out, "IQ record CSV")->required();
  synth->add_option("--ref", synth_ref, "reference beat CSV")->required();
  synth->add_option("--displacement", synth_disp, "also write the clean displacement CSV");
  synth_c.flags.add(synth, "--seed", "seed", "random seed (1)");
  synth_c.flags.add(synth, "--duration", "duration", "record length, s (120)");
  synth_c.flags.add(synth, "--fs", "fs", "sample rate, Hz (2000)");
  synth_c.flags.add(synth, "--alpha", "alpha", "harmonic ratio (0.4)");
  synth_c.flags.add(synth, "--theta", "theta", "harmonic phase, rad (1.0)");
  synth_c.flags.add(synth, "--snr-db", "snr_db", "heartbeat to noise power ratio, dB");

  // preprocess
  Common pre_c;
  std::string pre_in, pre_out;
  auto* pre = app.add_subcommand("preprocess", "IQ or displacement CSV -> filtered displacement CSV");
  pre_c.attach(pre);
  pre->add_option("input", pre_in, "record CSV")->required();
  pre->add_option("-o,--out", pre_out, "output CSV (stdout)");
  add_dsp_flags(pre, pre_c.flags);

  // extract
  Common ext_c;
  std::string ext_in, ext_out;
  auto* ext = app.add_subcommand("extract", "feature points of a record");
  ext_c.attach(ext);
  ext->add_option("input", ext_in, "IQ CSV, or displacement CSV taken as already filtered")->required();
  ext->add_option("-o,--out", ext_out, "output CSV (stdout)");
  add_dsp_flags(ext, ext_c.flags);
  ext_c.flags.add(ext, "--min-sep", "min_sep", "feature debounce distance, samples (2)");

  // estimate
  Common est_c;
  std::string est_in, est_out;
  auto* est = app.add_subcommand("estimate", "interbeat-interval estimates of a record");
  est_c.attach(est);
  est->add_option("input", est_in, "IQ CSV, or displacement CSV taken as already filtered")->required();
  est->add_option("-o,--out", est_out, "output CSV (stdout)");
  est_c.flags.add(est, "--gamma", "gamma", "inflection assignment magnitude (0.625)");
  add_dsp_flags(est, est_c.flags);
  add_topology_flags(est, est_c.flags);

  // eval
  Common ev_c;
  std::string ev_ref, ev_est, ev_out;
  std::optional<double> ev_t_start, ev_t_all;
  auto* ev = app.add_subcommand("eval", "score estimates against reference beats (JSON)");
  ev_c.attach(ev);
  ev->add_option("--ref", ev_ref, "reference beat CSV")->required();
  ev->add_option("--est", ev_est, "estimate CSV")->required();
  ev->add_option("-o,--out", ev_out, "output JSON (stdout)");
  ev->add_option("--t-start", ev_t_start, "TCR span start, s (first reference beat)");
  ev->add_option("--t-all", ev_t_all, "TCR span length, s (reference span)");
  add_metric_flags(ev, ev_c.flags);

  // sweep
  Common sw_c;
  std::string sw_manifest, sw_out, sw_cells, sw_mc_out;
  auto* sw = app.add_subcommand("sweep", "gamma sweep over a manifest of record/reference pairs");
  sw_c.attach(sw);
  sw->add_option("--manifest", sw_manifest, "CSV with header record_path,ref_path")->required();
  sw->add_option("-o,--out", sw_out, "per-gamma aggregate CSV (stdout)");
  sw->add_option("--cells", sw_cells, "per-record cell CSV");
  sw->add_option("--mc-out", sw_mc_out, "Monte Carlo trial CSV (trial,gamma,rms_ms)");
  sw_c.flags.add(sw, "--gamma-min", "gamma_min", "grid start (-2)");
  sw_c.flags.add(sw, "--gamma-max", "gamma_max", "grid end (2)");
  sw_c.flags.add(sw, "--gamma-step", "gamma_step", "grid step (0.125)");
  sw_c.flags.add(sw, "--monte-carlo", "monte_carlo", "random-gamma trials, 0 to skip (0)");
  sw_c.flags.add(sw, "--seed", "seed", "Monte Carlo seed (1)");
  add_dsp_flags(sw, sw_c.flags);
  add_topology_flags(sw, sw_c.flags);
  add_metric_flags(sw, sw_c.flags);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return fail("usage", e.what(), 2);
  }

  try {
    if (*synth) {
      const auto cfg = synth_c.resolve();
      const auto sc = harness::scene_from_config(cfg);
      auto result = model::synthesize(sc.scene, sc.seed);
      result.iq.label = cfg.get_string("label", "");
      emit(synth_out, [&](std::ostream& o) { io::write_iq(o, result.iq); });
      emit(synth_ref, [&](std::ostream& o) { io::write_ref(o, result.beat_times); });
      if (!synth_disp.empty())
        emit(synth_disp, [&](std::ostream& o) { io::write_waveform(o, result.displacement, false); });
    } else if (*pre) {
      const auto p = pre_c.pipeline();
      const auto rec = io::load_record(pre_in);
      const Waveform w = std::holds_alternative<IQRecord>(rec)
                             ? dsp::preprocess(std::get<IQRecord>(rec), p.dsp)
                             : dsp::preprocess_displacement(std::get<Waveform>(rec), p.dsp);
      emit(pre_out, [&](std::ostream& o) { io::write_waveform(o, w); });
    } else if (*ext) {
      const auto p = ext_c.pipeline();
      const auto w = harness::condition(io::load_record(ext_in), p.dsp);
      const auto f = features::extract_features(w, p.features);
      emit(ext_out, [&](std::ostream& o) { io::write_features(o, f); });
    } else if (*est) {
      const auto cfg = est_c.resolve();
      harness::PipelineConfig p;
      harness::apply_config(cfg, p);
      const auto rec = harness::prepare_record(io::load_record(est_in), metrics::ReferenceBeats(std::vector<double>{}),
                                               p, est_in);
      const auto e = harness::estimate(rec, cfg.get_double("gamma", 0.625), p.topology);
      emit(est_out, [&](std::ostream& o) { io::write_estimates(o, e); });
    } else if (*ev) {
      const auto p = ev_c.pipeline();
      const auto ref = io::load_ref(ev_ref);
      const auto e = io::load_estimates(ev_est);
      const auto r = ref.times();
      const double t_start = ev_t_start.value_or(r.empty() ? 0.0 : r.front());
      const double t_all = ev_t_all.value_or(r.size() < 2 ? 0.0 : r.back() - r.front());
      const auto report = metrics::evaluate(e, ref, p.tcr, t_all, t_start);
      emit(ev_out, [&](std::ostream& o) { o << io::report_json(report) << '\n'; });
    } else if (*sw) {
      const auto cfg = sw_c.resolve();
      harness::SweepSpec spec;
      harness::apply_config(cfg, spec.config);
      spec.gamma_values = harness::gamma_grid(cfg.get_double("gamma_min", -2.0), cfg.get_double("gamma_max", 2.0),
                                              cfg.get_double("gamma_step", 0.125));
      spec.records = io::load_manifest(sw_manifest);
      spec.seed = static_cast<std::uint64_t>(cfg.get_int("seed", 1));
      const auto result = harness::run_sweep(spec);
      emit(sw_out, [&](std::ostream& o) { harness::write_sweep_csv(o, result); });
      if (!sw_cells.empty()) emit(sw_cells, [&](std::ostream& o) { harness::write_cells_csv(o, result); });

      const long trials = cfg.get_int("monte_carlo", 0);
      if (trials < 0) throw InvalidInput("monte_carlo must be >= 0");
      if (trials > 0) {
        if (sw_mc_out.empty()) throw InvalidInput("--monte-carlo needs --mc-out");
        // Records that failed in the sweep are already reported in its cells.
        std::vector<harness::PreparedRecord> prepared;
        for (const auto& src : spec.records) {
          try {
            prepared.push_back(harness::prepare_record(io::load_record(src.record_path), io::load_ref(src.ref_path),
                                                       spec.config, src.record_path));
          } catch (const std::exception&) {
          }
        }
        if (prepared.empty()) throw InvalidInput("monte carlo: no record could be loaded");
        const auto mc = harness::monte_carlo_gamma(prepared, spec.config, static_cast<int>(trials), spec.seed);
        emit(sw_mc_out, [&](std::ostream& o) {
          o << "trial,gamma,rms_ms\n";
          for (std::size_t i = 0; i < mc.gammas.size(); ++i)
            o << i << ',' << io::format_double(mc.gammas[i]) << ',' << io::format_double(mc.rms_ms[i]) << '\n';
        });
      }
    }
  } catch (const FormatError& e) {
    return fail("format", e.what(), 3, e.line());
  } catch (const InvalidInput& e) {
    return fail("invalid_input", e.what(), 3);
  } catch (const std::exception& e) {
    return fail("internal", e.what(), 1);
  }
  return 0;
}
