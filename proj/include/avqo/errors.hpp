#pragma once

// Error types shared across the library.  Argument validation failures use
// std::invalid_argument directly; the types here carry extra context.

#include <stdexcept>
#include <string>

namespace avqo {

/// Thrown when a request exceeds a documented size cap (qubit counts, grids).
class capacity_error : public std::length_error {
 public:
  explicit capacity_error(const std::string& what) : std::length_error(what) {}
};

/// Thrown on malformed input files; the message starts with "file:line:".
class parse_error : public std::runtime_error {
 public:
  parse_error(const std::string& file, long line, const std::string& what)
      : std::runtime_error(file + ":" + std::to_string(line) + ": " + what) {}
  explicit parse_error(const std::string& what) : std::runtime_error(what) {}
};

/// Thrown when a numeric routine encounters a non-finite value it cannot
/// recover from (for example a NaN objective during optimization).
class numeric_error : public std::runtime_error {
 public:
  explicit numeric_error(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace avqo
