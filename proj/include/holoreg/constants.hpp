#pragma once

#include <numbers>

#include "holoreg/errors.hpp"

namespace holoreg {

inline constexpr double two_pi = 2.0 * std::numbers::pi;

/// Fundamental constants plus the spin magnetic moment m0 = g * mu_B.
/// All frequencies in this codebase are angular (rad/s); times are seconds.
struct PhysicalConstants {
  double hbar = 1.054571817e-34;   // J s
  double mu_B = 9.2740100783e-24;  // J/T
  double k_B = 1.380649e-23;       // J/K
  double g_factor = 2.0023;        // free-electron value

  double m0() const { return g_factor * mu_B; }  // J/T

  void validate() const {
    if (hbar <= 0 || mu_B <= 0 || k_B <= 0 || g_factor <= 0)
      throw ConfigError("physical constants must be strictly positive");
  }
};

}  // namespace holoreg
