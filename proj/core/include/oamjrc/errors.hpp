#pragma once

#include <stdexcept>
#include <string>

namespace oamjrc {

/// Malformed or inconsistent configuration (CLI exit code 1).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// The estimator could not produce an answer, e.g. a rank-deficient
/// rotational-invariance system (CLI exit code 2).
class EstimationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// File could not be read or written (CLI exit code 3).
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace oamjrc
