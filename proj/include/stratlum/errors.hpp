#pragma once

#include <stdexcept>
#include <string>

namespace stratlum {

// Base class for everything thrown by this library.
class Error : public std::runtime_error {
public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Bad user input: malformed files, schema violations, out-of-contract
// arguments.  CLI maps these to exit code 2.
class InputError : public Error {
public:
  using Error::Error;
};

// Parse failures carry the offending line when known.
class ParseError : public InputError {
public:
  ParseError(const std::string& msg, int line)
      : InputError(msg + " (line " + std::to_string(line) + ")"), line_(line) {}
  explicit ParseError(const std::string& msg) : InputError(msg), line_(-1) {}
  int line() const { return line_; }

private:
  int line_;
};

// Numerical failures inside the solver.  CLI maps these to exit code 3.
class SolverError : public Error {
public:
  using Error::Error;
};

// Wavelength outside a material's tabulated span.
class MaterialRangeError : public SolverError {
public:
  using SolverError::SolverError;
};

// Fabry-Perot denominator vanished, or a Fresnel denominator degenerated.
class DegeneracyError : public SolverError {
public:
  using SolverError::SolverError;
};

// Adaptive quadrature could not reach the requested tolerance.
class QuadratureError : public SolverError {
public:
  QuadratureError(const std::string& msg, double estimate, double error_bound)
      : SolverError(msg), estimate_(estimate), error_bound_(error_bound) {}
  double estimate() const { return estimate_; }
  double error_bound() const { return error_bound_; }

private:
  double estimate_;
  double error_bound_;
};

// Configuration the solver does not model (e.g. lossy superstrate far fields).
class UnsupportedError : public SolverError {
public:
  using SolverError::SolverError;
};

// Nonlinear fit did not converge (or data is rank deficient).  Exit code 4.
class FitError : public Error {
public:
  explicit FitError(const std::string& msg, std::string trace = {})
      : Error(msg), trace_(std::move(trace)) {}
  const std::string& trace() const { return trace_; }

private:
  std::string trace_;
};

} // namespace stratlum
