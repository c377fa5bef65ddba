#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace topobeat {

/// Thrown when an operation's precondition on its arguments is violated.
class InvalidInput : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Malformed interchange or config file; carries the 1-based line number.
class FormatError : public std::runtime_error {
 public:
  FormatError(const std::string& path, std::size_t line, const std::string& what)
      : std::runtime_error(path + ":" + std::to_string(line) + ": " + what),
        line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

}  // namespace topobeat
