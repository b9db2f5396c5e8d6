#pragma once

#include <stdexcept>
#include <string>

namespace holoreg {

/// Bad user input: malformed config, inconsistent parameters, invalid layout.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

/// Failure while running a simulation: truncation overflow, hardware-limit
/// violation, non-converging integrator.
class SimulationError : public std::runtime_error {
 public:
  explicit SimulationError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace holoreg
