#pragma once

#include <fstream>
#include <iosfwd>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "topobeat/features.hpp"
#include "topobeat/metrics.hpp"
#include "topobeat/signal.hpp"
#include "topobeat/topology.hpp"

// CSV interchange formats (UTF-8, comma separated, '#' comment lines first):
//
//   IQ record            # fs_hz=<float>        displacement   # fs_hz=<float>
//                        # label=<text>                        t_s,x
//                        t_s,i,q
//   reference beats      r_time_s
//   features             tau_s,kind
//   estimates            t_est_s,ibi_s,kind,c,q
//   sweep manifest       record_path,ref_path   (relative to the manifest)
//
// fs_hz is optional when at least two rows are present; it is then inferred
// from the first time step.

namespace topobeat::io {

using RecordInput = std::variant<IQRecord, Waveform>;

RecordInput read_record(std::istream& in, const std::string& origin);
RecordInput load_record(const std::string& path);

metrics::ReferenceBeats read_ref(std::istream& in, const std::string& origin);
metrics::ReferenceBeats load_ref(const std::string& path);

struct ManifestEntry {
  std::string record_path;
  std::string ref_path;
};

/// Relative paths are resolved against base_dir.
std::vector<ManifestEntry> read_manifest(std::istream& in, const std::string& origin, const std::string& base_dir);
std::vector<ManifestEntry> load_manifest(const std::string& path);

std::vector<topology::IbiEstimate> read_estimates(std::istream& in, const std::string& origin);
std::vector<topology::IbiEstimate> load_estimates(const std::string& path);

void write_iq(std::ostream& out, const IQRecord& iq);
/// Writes only the valid range when valid_only is set.
void write_waveform(std::ostream& out, const Waveform& w, bool valid_only = true);
void write_ref(std::ostream& out, std::span<const double> r_times);
void write_features(std::ostream& out, std::span<const FeaturePoint> features);
void write_estimates(std::ostream& out, std::span<const topology::IbiEstimate> est);

/// {"rms_ms": <number|null>, "tcr": ..., "n_estimates": ..., "excluded": ...}
std::string report_json(const metrics::EvalReport& report);

/// Shortest round-trip decimal representation.
std::string format_double(double v);

/// Opens `path` for writing, throwing InvalidInput on failure.
std::ofstream open_output(const std::string& path);

}  // namespace topobeat::io
