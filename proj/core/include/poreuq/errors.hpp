#pragma once

#include <stdexcept>
#include <string>

namespace poreuq {

/// Invalid or inconsistent run configuration. CLI exit code 2.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

/// Numerical failure: solver non-convergence, non-finite gradients,
/// sampler divergence abort, empty reduced reactive set. CLI exit code 3.
class NumericError : public std::runtime_error {
 public:
  explicit NumericError(const std::string& what) : std::runtime_error(what) {}
};

/// Filesystem / serialization failure. CLI exit code 4.
class IoError : public std::runtime_error {
 public:
  explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace poreuq
