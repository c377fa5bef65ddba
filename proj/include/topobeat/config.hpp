#pragma once

#include <cstddef>
#include <istream>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace topobeat {

/// Flat `key = value` configuration. `#` starts a comment; blank lines are
/// ignored; keys are case-sensitive and may appear once.
class Config {
 public:
  static Config parse(std::istream& in, const std::string& origin = "<config>");
  static Config load(const std::string& path);

  bool has(const std::string& key) const { return entries_.count(key) != 0; }
  std::optional<std::string> get(const std::string& key) const;

  double get_double(const std::string& key, double fallback) const;
  long get_int(const std::string& key, long fallback) const;
  std::string get_string(const std::string& key, const std::string& fallback) const;
  std::vector<double> get_doubles(const std::string& key) const;  ///< comma separated

  void set(const std::string& key, const std::string& value);

  /// Keys not present in `known`, in file order of appearance.
  std::vector<std::string> unknown_keys(const std::vector<std::string>& known) const;

 private:
  struct Entry {
    std::string value;
    std::size_t line = 0;
  };
  std::string origin_;
  std::map<std::string, Entry> entries_;
};

}  // namespace topobeat
