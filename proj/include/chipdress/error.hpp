#pragma once

#include <stdexcept>
#include <string>

namespace chipdress {

/// Invalid or inconsistent configuration input.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A numerical routine failed to meet its contract (non-convergence,
/// saddle point, invalid regime, ...).
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace chipdress
