#pragma once

#include <complex>
#include <cstdint>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "holoreg/ensemble.hpp"
#include "holoreg/exact_engine.hpp"
#include "holoreg/modes.hpp"
#include "holoreg/register_engine.hpp"

namespace holoreg {

struct NoiseConfig {
  double temperature = 0.0;  // K; 0 means use thermal_p directly
  double thermal_p = 0.0;    // mean excitation per mode
  double sigma_inhomogeneity = 0.0;       // rad/s, Gaussian spread of spin detunings
  double dipolar_rate = two_pi * 50e3;    // rad/s
  double eps1 = 0.0, eps2 = 0.0;          // echo-pulse area errors
  int shots = 100;
  std::uint64_t seed = 1;

  void validate() const;
};

/// Every register mode initialized as a thermal oscillator with mean
/// occupation p (truncated geometric distribution); cavity and CPB cold.
ThermalRegisterState thermal_register_state(const RegisterEngine& engine, double p);

/// Gaussian zero-mean detuning draw, one value per spin.
std::vector<double> draw_inhomogeneity(std::size_t n, double sigma, std::mt19937_64& rng);

/// Exact commutator expectation <[b(k_i), b^dag(k_j)]> for a partially
/// excited sample: sum_q (|g_q|^2 / N g_bar^2) e^{i(k_j-k_i) z_q} * (+-1),
/// negative for excited spins. Equals mode_overlap in the polarized limit.
std::complex<double> finite_polarization_commutator(const EnsembleGeometry& geometry,
                                                    const std::vector<bool>& excited,
                                                    double k_i, double k_j);

struct EchoInjectionResult {
  double k0_gain = 0.0;             // excitation deposited in the k = 0 mode
  double inhomogeneous_gain = 0.0;  // ... in the normalized inhomogeneous mode
  std::vector<double> register_gains;  // ... per register mode of the layout
  double total_excitation = 0.0;
};

/// Coherent-approximation bookkeeping of one imperfect echo pair acting on
/// an unexcited ensemble: pulse with area error eps2 at T, free precession
/// under the detuning draw for `interval`, pulse with area error eps1.
/// The eps2 residual is re-excited uniformly (k = 0); the eps1 residual
/// keeps the phases accumulated between the pulses (the inhomogeneous
/// mode). The drive profile defaults to the cavity coupling profile
/// |g_q| / g_bar.
EchoInjectionResult echo_error_injection(const EnsembleGeometry& geometry,
                                         const RegisterLayout& layout, double eps1, double eps2,
                                         const std::vector<double>& detunings, double interval,
                                         const std::vector<double>& drive_profile = {});

/// Deterministic pure-dephasing channel on a single-mode Fock density
/// matrix: rho_{nm} *= exp(-gamma t (n-m)^2).
void dephase_mode_density(Eigen::MatrixXcd& rho, double gamma, double duration);

/// Monte Carlo counterpart for the exact engine: independent Gaussian phase
/// kicks on each spin with variance 2 gamma t.
void dephasing_kicks(const ExactEngine& engine, SectorState& state, double gamma,
                     double duration, std::mt19937_64& rng);

/// ln 2 / gamma.
double dephasing_half_life(double gamma);

/// Least-squares slope of log(y) vs log(x) with its standard error.
struct ScalingFit {
  double slope = 0.0;
  double slope_stderr = 0.0;
  double intercept = 0.0;
};
ScalingFit fit_loglog(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace holoreg
