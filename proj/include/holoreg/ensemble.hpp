#pragma once

#include <complex>
#include <cstdint>
#include <vector>

#include "holoreg/constants.hpp"

namespace holoreg {

enum class CouplingProfile { Uniform, CavityMode, UserTable };
enum class Placement { Grid, UniformRandom };

/// Recipe for building an ensemble: spin count, sample length, how spins are
/// placed along z and how their cavity couplings vary with position.
struct EnsembleSpec {
  std::size_t n_spins = 0;
  double length = 0.0;  // m
  CouplingProfile profile = CouplingProfile::Uniform;
  Placement placement = Placement::Grid;
  double coupling_scale = 1.0;  // rad/s; peak coupling for CavityMode
  std::vector<double> user_positions;                 // UserTable only
  std::vector<std::complex<double>> user_couplings;   // UserTable only
};

/// Spin positions z_q in [0, L], per-spin couplings g_q and the derived
/// root-mean-square coupling g_bar. Immutable after construction.
class EnsembleGeometry {
 public:
  /// Deterministic for a fixed (spec, seed) pair.
  static EnsembleGeometry build(const EnsembleSpec& spec, std::uint64_t seed);

  static EnsembleGeometry from_table(std::vector<double> positions,
                                     std::vector<std::complex<double>> couplings,
                                     double length);

  const std::vector<double>& positions() const { return positions_; }
  const std::vector<std::complex<double>>& couplings() const { return couplings_; }
  double g_bar() const { return g_bar_; }
  double length() const { return length_; }
  std::size_t n_spins() const { return positions_.size(); }

 private:
  EnsembleGeometry() = default;
  std::vector<double> positions_;
  std::vector<std::complex<double>> couplings_;
  double g_bar_ = 0.0;
  double length_ = 0.0;
};

/// omega_s = m0 B / hbar.
double larmor_frequency(const PhysicalConstants& constants, double field);

/// sqrt(N) * g_bar = sqrt(sum |g_q|^2), the enhanced exchange rate between
/// the cavity and the uniform spin-wave mode.
double collective_rabi(const EnsembleGeometry& geometry);

/// Scalar form for ensembles too large to enumerate.
double collective_rabi(double n_spins, double g_bar);

/// Boltzmann excited-state probability of a two-level system at temperature T.
double thermal_probability(const PhysicalConstants& constants, double omega,
                           double temperature);

}  // namespace holoreg
