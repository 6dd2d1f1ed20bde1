#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace tscgd {

/// Shapes of vectors or Jacobians do not line up.
class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// The operation needs analytic (expected-value) access the object does not provide.
class UnsupportedError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// A run configuration is missing a key or carries an invalid value.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string key, const std::string& message)
      : std::runtime_error(message), key_(std::move(key)) {}

  const std::string& key() const noexcept { return key_; }

 private:
  std::string key_;
};

}  // namespace tscgd
