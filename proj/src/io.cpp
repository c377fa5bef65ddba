#include "topobeat/io.hpp"

#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <istream>
#include <optional>
#include <ostream>
#include <sstream>

#include "json.hpp"
#include "topobeat/error.hpp"

namespace topobeat::io {

namespace {

std::string trim(std::string s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(trim(item));
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

double parse_number(const std::string& text, const std::string& origin, std::size_t line) {
  double v = 0.0;
  const char* b = text.data();
  const char* e = b + text.size();
  if (!text.empty() && *b == '+') ++b;
  const auto [ptr, ec] = std::from_chars(b, e, v);
  if (ec != std::errc() || ptr != e || !std::isfinite(v))
    throw FormatError(origin, line, "expected a finite number, got '" + text + "'");
  return v;
}

// Reads '#' comments (collecting key=value pairs), the header line and the data rows.
struct Table {
  std::vector<std::pair<std::string, std::string>> meta;
  std::vector<std::string> header;
  std::size_t header_line = 0;
  std::vector<std::pair<std::size_t, std::vector<std::string>>> rows;
};

Table read_table(std::istream& in, const std::string& origin) {
  Table t;
  std::string raw;
  std::size_t line = 0;
  while (std::getline(in, raw)) {
    ++line;
    if (line == 1 && raw.size() >= 3 && raw.compare(0, 3, "\xEF\xBB\xBF") == 0) raw.erase(0, 3);
    const std::string s = trim(raw);
    if (s.empty()) continue;
    if (s[0] == '#') {
      if (!t.header.empty()) continue;
      const std::string body = trim(s.substr(1));
      const auto eq = body.find('=');
      if (eq != std::string::npos) t.meta.emplace_back(trim(body.substr(0, eq)), trim(body.substr(eq + 1)));
      continue;
    }
    if (t.header.empty()) {
      t.header = split(s);
      t.header_line = line;
      continue;
    }
    t.rows.emplace_back(line, split(s));
  }
  if (t.header.empty()) throw FormatError(origin, line, "missing CSV header");
  return t;
}

std::optional<std::string> meta_value(const Table& t, const std::string& key) {
  for (const auto& [k, v] : t.meta)
    if (k == key) return v;
  return std::nullopt;
}

std::vector<std::vector<double>> numeric_rows(const Table& t, const std::string& origin) {
  std::vector<std::vector<double>> out;
  out.reserve(t.rows.size());
  for (const auto& [line, cells] : t.rows) {
    if (cells.size() != t.header.size())
      throw FormatError(origin, line, "expected " + std::to_string(t.header.size()) + " columns, got " +
                                          std::to_string(cells.size()));
    std::vector<double> row;
    row.reserve(cells.size());
    for (const auto& c : cells) row.push_back(parse_number(c, origin, line));
    out.push_back(std::move(row));
  }
  return out;
}

bool header_is(const Table& t, std::initializer_list<const char*> names) {
  if (t.header.size() != names.size()) return false;
  std::size_t i = 0;
  for (const char* n : names)
    if (t.header[i++] != n) return false;
  return true;
}

// Sample rate from the header comment or the first time step; time column must
// stay on the uniform grid to within half a sample.
double resolve_fs(const Table& t, const std::vector<std::vector<double>>& rows, const std::string& origin) {
  double fs = 0.0;
  if (const auto v = meta_value(t, "fs_hz")) {
    fs = parse_number(*v, origin, t.header_line);
    if (!(fs > 0.0)) throw FormatError(origin, t.header_line, "fs_hz must be positive");
  } else {
    if (rows.size() < 2)
      throw FormatError(origin, t.header_line, "fs_hz header missing and fewer than two rows");
    const double step = rows[1][0] - rows[0][0];
    if (!(step > 0.0)) throw FormatError(origin, t.rows[1].first, "time column must increase");
    fs = 1.0 / step;
  }
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const double expected = rows[0][0] + static_cast<double>(i) / fs;
    if (std::abs(rows[i][0] - expected) > 0.5 / fs)
      throw FormatError(origin, t.rows[i].first, "time column not uniform at fs_hz=" + format_double(fs));
  }
  return fs;
}

}  // namespace

std::string format_double(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return ec == std::errc() ? std::string(buf, ptr) : std::string("nan");
}

RecordInput read_record(std::istream& in, const std::string& origin) {
  const Table t = read_table(in, origin);
  const auto rows = numeric_rows(t, origin);
  if (rows.empty()) throw FormatError(origin, t.header_line, "no data rows");
  const double fs = resolve_fs(t, rows, origin);
  if (header_is(t, {"t_s", "i", "q"})) {
    std::vector<std::complex<double>> s;
    s.reserve(rows.size());
    for (const auto& r : rows) s.emplace_back(r[1], r[2]);
    IQRecord iq = IQRecord::make(std::move(s), fs, rows[0][0]);
    iq.label = meta_value(t, "label").value_or("");
    return iq;
  }
  if (header_is(t, {"t_s", "x"})) {
    std::vector<double> s;
    s.reserve(rows.size());
    for (const auto& r : rows) s.push_back(r[1]);
    return Waveform::make(std::move(s), fs, rows[0][0]);
  }
  throw FormatError(origin, t.header_line, "unrecognised header; expected 't_s,i,q' or 't_s,x'");
}

RecordInput load_record(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidInput("cannot open record '" + path + "'");
  return read_record(in, path);
}

metrics::ReferenceBeats read_ref(std::istream& in, const std::string& origin) {
  const Table t = read_table(in, origin);
  if (!header_is(t, {"r_time_s"})) throw FormatError(origin, t.header_line, "expected header 'r_time_s'");
  const auto rows = numeric_rows(t, origin);
  std::vector<double> times;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (i > 0 && !(rows[i][0] > rows[i - 1][0]))
      throw FormatError(origin, t.rows[i].first, "reference times must be strictly increasing");
    times.push_back(rows[i][0]);
  }
  return metrics::ReferenceBeats(std::move(times));
}

metrics::ReferenceBeats load_ref(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidInput("cannot open reference '" + path + "'");
  return read_ref(in, path);
}

std::vector<ManifestEntry> read_manifest(std::istream& in, const std::string& origin, const std::string& base_dir) {
  const Table t = read_table(in, origin);
  if (!header_is(t, {"record_path", "ref_path"}))
    throw FormatError(origin, t.header_line, "expected header 'record_path,ref_path'");
  const std::filesystem::path base(base_dir);
  auto resolve = [&](const std::string& p) {
    const std::filesystem::path q(p);
    return (q.is_absolute() || base.empty() ? q : base / q).string();
  };
  std::vector<ManifestEntry> out;
  for (const auto& [line, cells] : t.rows) {
    if (cells.size() != 2 || cells[0].empty() || cells[1].empty())
      throw FormatError(origin, line, "expected two non-empty paths");
    out.push_back({resolve(cells[0]), resolve(cells[1])});
  }
  if (out.empty()) throw FormatError(origin, t.header_line, "manifest lists no records");
  return out;
}

std::vector<ManifestEntry> load_manifest(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidInput("cannot open manifest '" + path + "'");
  return read_manifest(in, path, std::filesystem::path(path).parent_path().string());
}

std::vector<topology::IbiEstimate> read_estimates(std::istream& in, const std::string& origin) {
  const Table t = read_table(in, origin);
  if (!header_is(t, {"t_est_s", "ibi_s", "kind", "c", "q"}))
    throw FormatError(origin, t.header_line, "expected header 't_est_s,ibi_s,kind,c,q'");
  std::vector<topology::IbiEstimate> out;
  for (const auto& [line, cells] : t.rows) {
    if (cells.size() != 5) throw FormatError(origin, line, "expected 5 columns");
    topology::IbiEstimate e;
    e.t_est = parse_number(cells[0], origin, line);
    e.ibi = parse_number(cells[1], origin, line);
    const auto kind = parse_feature_kind(cells[2]);
    if (!kind) throw FormatError(origin, line, "unknown feature kind '" + cells[2] + "'");
    e.kind = *kind;
    e.c = parse_number(cells[3], origin, line);
    e.q = parse_number(cells[4], origin, line);
    out.push_back(e);
  }
  return out;
}

std::vector<topology::IbiEstimate> load_estimates(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidInput("cannot open estimates '" + path + "'");
  return read_estimates(in, path);
}

void write_iq(std::ostream& out, const IQRecord& iq) {
  out << "# fs_hz=" << format_double(iq.fs) << '\n';
  if (!iq.label.empty()) out << "# label=" << iq.label << '\n';
  out << "t_s,i,q\n";
  for (std::size_t i = 0; i < iq.samples.size(); ++i)
    out << format_double(iq.t0 + static_cast<double>(i) / iq.fs) << ','
        << format_double(iq.samples[i].real()) << ',' << format_double(iq.samples[i].imag()) << '\n';
}

void write_waveform(std::ostream& out, const Waveform& w, bool valid_only) {
  const std::size_t b = valid_only ? w.valid_begin : 0;
  const std::size_t e = valid_only ? w.valid_end : w.size();
  out << "# fs_hz=" << format_double(w.fs) << '\n' << "t_s,x\n";
  for (std::size_t i = b; i < e; ++i)
    out << format_double(w.time_at(static_cast<double>(i))) << ',' << format_double(w.samples[i]) << '\n';
}

void write_ref(std::ostream& out, std::span<const double> r_times) {
  out << "r_time_s\n";
  for (double t : r_times) out << format_double(t) << '\n';
}

void write_features(std::ostream& out, std::span<const FeaturePoint> features) {
  out << "tau_s,kind\n";
  for (const auto& f : features) out << format_double(f.tau) << ',' << to_string(f.kind) << '\n';
}

void write_estimates(std::ostream& out, std::span<const topology::IbiEstimate> est) {
  out << "t_est_s,ibi_s,kind,c,q\n";
  for (const auto& e : est)
    out << format_double(e.t_est) << ',' << format_double(e.ibi) << ',' << to_string(e.kind) << ','
        << format_double(e.c) << ',' << format_double(e.q) << '\n';
}

std::string report_json(const metrics::EvalReport& report) {
  nlohmann::ordered_json j;
  j["rms_ms"] = report.rms_ms ? nlohmann::ordered_json(*report.rms_ms) : nlohmann::ordered_json(nullptr);
  j["tcr"] = report.tcr;
  j["n_estimates"] = report.n_estimates;
  j["excluded"] = report.excluded;
  return j.dump();
}

std::ofstream open_output(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw InvalidInput("cannot open '" + path + "' for writing");
  return out;
}

}  // namespace topobeat::io
