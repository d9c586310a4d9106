#pragma once

#include <stdexcept>
#include <string>

namespace psf {

// Precondition / dimension violations at module boundaries.
struct ContractViolation : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// Numerical breakdowns (non-PSD covariance, singular precision, ...).
struct NumericalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Invalid run configuration (bad schedule, malformed file, ...).
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace psf
