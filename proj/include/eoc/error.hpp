#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace eoc {

/// Invalid configuration or precondition violation on user-supplied values.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A trajectory left the finite floats. `step` is the iteration or
/// timestep at which the first non-finite value appeared.
class NonFiniteError : public std::runtime_error {
 public:
  NonFiniteError(const std::string& what, std::size_t step)
      : std::runtime_error(what + " (non-finite value at step " + std::to_string(step) + ")"),
        step_(step) {}
  std::size_t step() const noexcept { return step_; }

 private:
  std::size_t step_;
};

/// Filesystem or parse failure; the message always names the path.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Too few usable points for a statistic.
class InsufficientDataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace eoc
