#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace harvest {

/// Base class for failures raised by the library (as opposed to argument
/// validation, which uses std::invalid_argument).
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Fixed-point iteration did not reach its tolerance. Carries the sup-norm
/// gap of every sweep so callers can report the trace.
class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string& what, std::vector<double> gaps)
      : Error(what), gaps_(std::move(gaps)) {}
  const std::vector<double>& gaps() const noexcept { return gaps_; }

 private:
  std::vector<double> gaps_;
};

/// Too much jump-kernel mass fell outside the grid and had to be clamped.
class ClampOverflowError : public Error {
 public:
  using Error::Error;
};

/// No (or an ambiguous, or an inadmissible) critical biomass.
class CriticalValueError : public Error {
 public:
  using Error::Error;
};

class FlowError : public Error {
 public:
  using Error::Error;
};

}  // namespace harvest
