#pragma once

#include <stdexcept>
#include <string>

namespace gsfica {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Invalid distribution or configuration parameters.
struct ParameterError : Error {
  using Error::Error;
};

// Divergent integral, unattainable tolerance, undefined score, etc.
struct NumericError : Error {
  using Error::Error;
};

// Covariance (near-)rank deficient: mixing matrix is not full rank.
struct IllConditionedCovarianceError : NumericError {
  using NumericError::NumericError;
};

struct InsufficientSampleError : Error {
  using Error::Error;
};

// A (nonlinearity, source) pairing with alpha ~ 0; the fixed-point theory
// requires alpha != 0 for every row.
struct DegeneratePairingError : NumericError {
  using NumericError::NumericError;
};

// kappa_i * kappa_j <= 1 (e.g. two Gaussian sources): no finite CRB.
struct NonIdentifiableError : NumericError {
  using NumericError::NumericError;
};

struct UnsupportedDimensionError : Error {
  using Error::Error;
};

}  // namespace gsfica
