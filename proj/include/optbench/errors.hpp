// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace optbench {

/// Out-of-range hyperparameters, malformed config files, unknown keys.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Caller passed arguments that violate an operation's preconditions
/// (dimension mismatch, index out of range).
class UsageError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Requested a simulation mapping that has no inclusion proof behind it.
class UnsupportedMapping : public ConfigError {
 public:
  using ConfigError::ConfigError;
};

/// A non-finite value showed up in a parameter, gradient, or loss.
class DivergenceError : public std::runtime_error {
 public:
  DivergenceError(const std::string& what, std::int64_t step)
      : std::runtime_error(what + " (step " + std::to_string(step) + ")"),
        step_(step) {}

  std::int64_t step() const noexcept { return step_; }

 private:
  std::int64_t step_;
};

}  // namespace optbench
