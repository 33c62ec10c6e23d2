#pragma once

#include <stdexcept>
#include <string>

namespace seisbed {

/// Invalid run configuration (bad grid extents, CFL violation, parse errors, ...).
/// Mapped to exit code 2 by the CLI.
struct config_error : std::runtime_error {
  explicit config_error(const std::string& msg) : std::runtime_error(msg) {}
};

/// Numerical failure at run time (instability, singular Hessian, estimator
/// breakdown). Mapped to exit code 3 by the CLI.
struct numeric_error : std::runtime_error {
  explicit numeric_error(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace seisbed
