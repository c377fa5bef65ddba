#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "topobeat/config.hpp"
#include "topobeat/dsp.hpp"
#include "topobeat/features.hpp"
#include "topobeat/io.hpp"
#include "topobeat/metrics.hpp"
#include "topobeat/synth.hpp"
#include "topobeat/topology.hpp"

namespace topobeat::harness {

/// Everything needed to go from a record to an EvalReport, except gamma.
struct PipelineConfig {
  dsp::PreprocessOptions dsp;
  features::FeatureOptions features;
  topology::TopologyParams topology;
  metrics::TcrOptions tcr;
};

/// A record after the gamma-independent stages: displacement and features.
/// TCR is evaluated over [t_start, t_start + t_all), the span where the
/// filtered waveform is valid.
struct PreparedRecord {
  std::string id;
  Waveform signal;
  std::vector<FeaturePoint> features;
  metrics::ReferenceBeats ref;
  double t_start = 0.0;
  double t_all = 0.0;
};

/// IQ input runs the full DSP chain; a displacement is taken as already
/// preprocessed.
Waveform condition(const io::RecordInput& input, const dsp::PreprocessOptions& opts);

/// Errors are rethrown as InvalidInput prefixed with `id`.
PreparedRecord prepare_record(const io::RecordInput& input, metrics::ReferenceBeats ref,
                              const PipelineConfig& cfg, std::string id = "record");

std::vector<topology::IbiEstimate> estimate(const PreparedRecord& rec, double gamma,
                                            const topology::TopologyParams& p);

metrics::EvalReport evaluate_prepared(const PreparedRecord& rec, double gamma, const PipelineConfig& cfg);

/// dsp -> features -> topology -> metrics for one record and one gamma.
metrics::EvalReport run_record(const io::RecordInput& input, const metrics::ReferenceBeats& ref,
                               double gamma, const PipelineConfig& cfg);

/// -2, -1.875, ..., 2.
std::vector<double> default_gamma_grid();
std::vector<double> gamma_grid(double lo, double hi, double step);

using RecordSource = io::ManifestEntry;

struct SweepSpec {
  std::vector<double> gamma_values = default_gamma_grid();
  std::vector<RecordSource> records;
  PipelineConfig config;
  std::uint64_t seed = 1;
};

struct SweepCell {
  double gamma = 0.0;
  std::string record;
  std::optional<metrics::EvalReport> report;  ///< nullopt when the record failed
  std::string error;
};

/// Per-gamma mean/std over records with a defined RMS (TCR over the same set).
struct GammaAggregate {
  double gamma = 0.0;
  metrics::Summary rms_ms;
  metrics::Summary tcr;
  std::size_t failed = 0;
};

struct SweepResult {
  std::vector<SweepCell> cells;  ///< gamma-major, records in input order
  std::vector<GammaAggregate> aggregates;
};

/// Aggregates recomputed from cells in one pass.
std::vector<GammaAggregate> aggregate(std::span<const SweepCell> cells, std::span<const double> gammas);

SweepResult run_sweep(std::span<const PreparedRecord> records, std::span<const double> gammas,
                      const PipelineConfig& cfg);

/// Loads every record (failures become failed cells) and sweeps.
SweepResult run_sweep(const SweepSpec& spec);

struct MonteCarloResult {
  std::vector<double> gammas;
  std::vector<double> rms_ms;  ///< mean over records with defined RMS, per trial
  metrics::Summary summary;
};

/// `trials` gammas drawn uniformly from [lo, hi] with a seeded generator.
MonteCarloResult monte_carlo_gamma(std::span<const PreparedRecord> records, const PipelineConfig& cfg,
                                   int trials, std::uint64_t seed, double lo = -2.0, double hi = 2.0);

/// gamma,rms_mean,rms_std,tcr_mean,tcr_std (empty statistics when no record has a defined RMS)
void write_sweep_csv(std::ostream& out, const SweepResult& result);
/// gamma,record,rms_ms,tcr,n_estimates,excluded,error
void write_cells_csv(std::ostream& out, const SweepResult& result);

/// Config keys understood by apply_config / scene_from_config.
const std::vector<std::string>& pipeline_keys();
const std::vector<std::string>& scene_keys();

void apply_config(const Config& cfg, PipelineConfig& out);

struct SceneConfig {
  model::SyntheticScene scene;
  std::uint64_t seed = 1;
};

/// Builds a scene (beats from a random walk) from config keys; see README.
SceneConfig scene_from_config(const Config& cfg);

}  // namespace topobeat::harness
