#pragma once

#include <optional>

#include "holoreg/errors.hpp"

namespace holoreg {

/// Cavity, bias-field and CPB parameters of one device. Angular frequencies.
struct DeviceParams {
  double omega_c = 0.0;     // cavity resonance, rad/s
  double kappa = 0.0;       // cavity linewidth, rad/s
  double bias_field = 0.0;  // homogeneous bias B, T
  double length = 0.0;      // sample / cavity length L, m
  double g_cpb = 0.0;       // CPB-cavity coupling, rad/s
  double delta_cpb = 0.0;   // CPB-cavity detuning when idle, rad/s
  std::optional<double> cpb_t1;  // s
  std::optional<double> cpb_t2;  // s

  void validate() const {
    if (omega_c <= 0) throw ConfigError("omega_c must be positive");
    if (length <= 0) throw ConfigError("sample length must be positive");
    if (kappa < 0) throw ConfigError("kappa must be non-negative");
  }
};

}  // namespace holoreg
