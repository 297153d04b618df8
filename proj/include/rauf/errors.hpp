#pragma once

#include <stdexcept>
#include <string>

namespace rauf {

/// Base class for all toolkit errors.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Invalid configuration or parameter combination.
struct ConfigError : Error {
  using Error::Error;
};

/// Bin or sequence index outside its valid extent.
struct IndexError : Error {
  using Error::Error;
};

/// Geometrically degenerate input (origin coordinate, rank-deficient
/// direction set, singular normal equations).
struct DegenerateError : Error {
  using Error::Error;
};

/// Matrix factorization failure (non positive definite covariance).
struct DecompositionError : Error {
  using Error::Error;
};

/// Metric undefined for the given inputs (e.g. empty point cloud).
struct MetricError : Error {
  using Error::Error;
};

/// File could not be read, written, or parsed.
struct IoError : Error {
  using Error::Error;
};

}  // namespace rauf
