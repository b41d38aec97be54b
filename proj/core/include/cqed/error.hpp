#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace cqed {

// Base for every error raised by the toolkit. The CLI maps InputError to
// exit code 1 and ConvergenceError to exit code 2.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Bad arguments, malformed files, violated preconditions.
class InputError : public Error {
 public:
  using Error::Error;
};

// Solver or fitter did not produce a usable answer.
class ConvergenceError : public Error {
 public:
  using Error::Error;
};

// Basis or grid too small: the doubling check moved f01 by more than the
// allowed tolerance.
class TruncationError : public ConvergenceError {
 public:
  TruncationError(const std::string& what, double drift_mhz)
      : ConvergenceError(what), drift_mhz_(drift_mhz) {}
  double drift_mhz() const { return drift_mhz_; }

 private:
  double drift_mhz_;
};

// Zero detuning or a straddling pole in a dispersive formula.
class ResonanceError : public InputError {
 public:
  using InputError::InputError;
};

// No resonance / dip / oscillation detectable in the data.
class NoFitError : public ConvergenceError {
 public:
  using ConvergenceError::ConvergenceError;
};

// Target value lies outside what the model can produce.
class NoSolutionError : public InputError {
 public:
  NoSolutionError(const std::string& what, double lo, double hi)
      : InputError(what), lo_(lo), hi_(hi) {}
  double lo() const { return lo_; }
  double hi() const { return hi_; }

 private:
  double lo_;
  double hi_;
};

// Non-fatal diagnostics collected by operations that can warn.
using Warnings = std::vector<std::string>;

inline void warn(Warnings* sink, std::string message) {
  if (sink != nullptr) sink->push_back(std::move(message));
}

}  // namespace cqed
