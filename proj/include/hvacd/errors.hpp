#pragma once

#include <stdexcept>
#include <string>

namespace hvacd {

/// Malformed or unusable input data (bad CSV rows, uncovered dates, empty ensembles).
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid configuration values or missing configuration files.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Numerical failure inside an estimator (rank deficiency, divergence).
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace hvacd
