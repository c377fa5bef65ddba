#include "topobeat/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "topobeat/error.hpp"

namespace topobeat {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

// Values set programmatically (line 0) have no file position to report.
[[noreturn]] void bad_value(const std::string& origin, std::size_t line, const std::string& what) {
  if (line == 0) throw InvalidInput(what);
  throw FormatError(origin, line, what);
}

double to_double(const std::string& text, const std::string& origin, std::size_t line,
                 const std::string& key) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(text, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != text.size() || !std::isfinite(v))
    bad_value(origin, line, "key '" + key + "' expects a finite number, got '" + text + "'");
  return v;
}

}  // namespace

Config Config::parse(std::istream& in, const std::string& origin) {
  Config cfg;
  cfg.origin_ = origin;
  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const auto hash = raw.find('#');
    const std::string line = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw FormatError(origin, line_no, "expected 'key = value'");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) throw FormatError(origin, line_no, "empty key");
    if (cfg.entries_.count(key)) throw FormatError(origin, line_no, "duplicate key '" + key + "'");
    cfg.entries_[key] = {value, line_no};
  }
  return cfg;
}

Config Config::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidInput("cannot open config file '" + path + "'");
  return parse(in, path);
}

std::optional<std::string> Config::get(const std::string& key) const {
  const auto it = entries_.find(key);
  if (it == entries_.end()) return std::nullopt;
  return it->second.value;
}

double Config::get_double(const std::string& key, double fallback) const {
  const auto it = entries_.find(key);
  if (it == entries_.end()) return fallback;
  return to_double(it->second.value, origin_, it->second.line, key);
}

long Config::get_int(const std::string& key, long fallback) const {
  const auto it = entries_.find(key);
  if (it == entries_.end()) return fallback;
  const auto& text = it->second.value;
  long v = 0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size())
    bad_value(origin_, it->second.line, "key '" + key + "' expects an integer, got '" + text + "'");
  return v;
}

std::string Config::get_string(const std::string& key, const std::string& fallback) const {
  return get(key).value_or(fallback);
}

std::vector<double> Config::get_doubles(const std::string& key) const {
  std::vector<double> out;
  const auto it = entries_.find(key);
  if (it == entries_.end()) return out;
  std::stringstream ss(it->second.value);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(to_double(item, origin_, it->second.line, key));
  }
  return out;
}

void Config::set(const std::string& key, const std::string& value) { entries_[key] = {value, 0}; }

std::vector<std::string> Config::unknown_keys(const std::vector<std::string>& known) const {
  std::vector<std::pair<std::size_t, std::string>> found;
  for (const auto& [k, e] : entries_)
    if (std::find(known.begin(), known.end(), k) == known.end()) found.emplace_back(e.line, k);
  std::sort(found.begin(), found.end());
  std::vector<std::string> out;
  for (auto& f : found) out.push_back(std::move(f.second));
  return out;
}

}  // namespace topobeat
