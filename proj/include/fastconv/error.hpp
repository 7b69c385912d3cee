#pragma once

#include <stdexcept>
#include <string>

namespace fastconv {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid parameters, presets or kernel metadata.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Time points supplied out of order (non-increasing grid).
class OrderingError : public Error {
 public:
  using Error::Error;
};

/// A distance t_n - t_j is not covered by any approximation interval,
/// typically a step below h_min or a time beyond the configured horizon.
class StepScaleError : public Error {
 public:
  using Error::Error;
};

/// Nonlinear solve divergence, controller failure, singular systems.
class NumericalFailure : public Error {
 public:
  using Error::Error;
};

}  // namespace fastconv
