// Exception types shared across the library.
#pragma once

#include <stdexcept>
#include <string>

namespace vvflow {

class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// Precondition violations: bad sizes, negative viscosity, non-solenoidal input, ...
class InvalidArgumentError : public Error {
 public:
  using Error::Error;
};

// A linear system turned out singular (zero row/pivot).
class SingularSystemError : public Error {
 public:
  using Error::Error;
};

// Point-location failure in Field evaluation.
class PointOutsideDomainError : public Error {
 public:
  using Error::Error;
};

// Config-file or flag parsing problems; carries a line number when known.
class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& what, int line = -1)
      : Error(line >= 0 ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}
  int line() const { return line_; }

 private:
  int line_;
};

}  // namespace vvflow
