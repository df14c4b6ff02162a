#ifndef DHPLAN_ERRORS_HPP
#define DHPLAN_ERRORS_HPP

#include <cstddef>
#include <stdexcept>
#include <string>

namespace dhplan {

/// Base class for all dhplan exceptions.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// Malformed input file (MPS, scenario JSON, CSV, solution file).
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t line)
      : Error(what + " (line " + std::to_string(line) + ")"), line_(line) {}
  explicit ParseError(const std::string& what) : Error(what), line_(0) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

/// The LP engine lost numerical control (residual too large after
/// refactorization, singular basis, ...).
class NumericalError : public Error {
 public:
  using Error::Error;
};

/// External solver invocation failed (nonzero exit, unusable solution).
class SolverFailure : public Error {
 public:
  using Error::Error;
};

/// File system problem (unreadable path, unwritable directory).
class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace dhplan

#endif
