#pragma once

#include <stdexcept>
#include <string>

namespace beamwander {

/// Base of every error the library raises.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// A physical parameter is outside its domain (negative C_n², l0 >= L0, ...).
class ParameterError : public Error {
public:
  using Error::Error;
};

/// The sampling lattice cannot represent the requested field or screen.
class ResolutionError : public Error {
public:
  using Error::Error;
};

/// Two objects that must share a grid (or shape) do not.
class InputMismatchError : public Error {
public:
  using Error::Error;
};

/// Zero total intensity or another input with no meaningful moments.
class DegenerateInputError : public Error {
public:
  using Error::Error;
};

/// Quadrature failed to reach the requested tolerance.
class NumericalError : public Error {
public:
  NumericalError(const std::string &what, double achieved)
      : Error(what + " (achieved abs. error " + std::to_string(achieved) + ")"),
        achieved_tolerance(achieved) {}
  double achieved_tolerance;
};

/// A vacuum step would alias the paraxial transfer function.
class StepSizeError : public Error {
public:
  StepSizeError(const std::string &what, double max_dz)
      : Error(what + " (suggested maximum dz " + std::to_string(max_dz) + " m)"),
        max_step(max_dz) {}
  double max_step;
};

/// Invalid configuration file or flag; `key` names the offending entry.
class ConfigError : public Error {
public:
  ConfigError(std::string k, const std::string &what)
      : Error("config key '" + k + "': " + what), key(std::move(k)) {}
  std::string key;
};

} // namespace beamwander
