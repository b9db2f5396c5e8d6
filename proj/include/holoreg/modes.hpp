#pragma once

#include <complex>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "holoreg/constants.hpp"
#include "holoreg/ensemble.hpp"

namespace holoreg {

/// Coefficient vector of the spin-wave creation operator at wavenumber k:
/// c_q = (g_q / g_bar) e^{i k z_q} / sqrt(N). Unit norm by construction.
struct ModeVector {
  double wavenumber = 0.0;  // rad/m
  Eigen::VectorXcd coefficients;

  static ModeVector at(const EnsembleGeometry& geometry, double wavenumber);
};

/// Mode overlap M(dk) = sum_q e^{i dk z_q} |g_q|^2 / (N g_bar^2); the
/// commutator [b(k_i), b^dag(k_j)] of two spin-wave modes in the polarized
/// limit, with dk = k_j - k_i. |M| <= 1, M(0) = 1.
std::complex<double> mode_overlap(const EnsembleGeometry& geometry, double delta_k);

/// Continuum (N -> infinity) overlap of the |sin(2 pi z / L)| coupling
/// profile as a function of winding-number difference dw = dk L / 2 pi:
/// sinc(pi dw) / [1 - (dw/2)^2], with the removable singularities at
/// dw = +-2 filled by their limit value -1/2.
double continuum_overlap(double delta_w);

/// The same continuum limit for spins on z in [0, L]: the discrete sum
/// converges to e^{i pi dw} * continuum_overlap(dw); the phase is the
/// choice of coordinate origin (it vanishes for z in [-L/2, L/2]).
std::complex<double> continuum_overlap_phased(double delta_w);

enum class ModeScheme { Stride3, Dense };

/// A chosen set of register modes (winding numbers) together with their
/// pairwise-overlap Gram matrix.
struct RegisterLayout {
  std::vector<int> windings;
  double length = 0.0;  // m, maps winding w -> wavenumber 2 pi w / L
  Eigen::MatrixXcd gram;
  double crosstalk_budget = 1e-2;

  std::size_t size() const { return windings.size(); }
  double wavenumber(std::size_t i) const { return two_pi * windings.at(i) / length; }
  int winding_of_mode(std::size_t i) const { return windings.at(i); }

  /// Largest |gram| off-diagonal magnitude (0 for a single mode).
  double max_off_diagonal() const;

  /// Throws if the Gram is not Hermitian-with-unit-diagonal or exceeds the
  /// crosstalk budget.
  void validate() const;
};

/// Mutually orthogonal register sets in the continuum limit:
/// Stride3 yields {0, 3, 6, ...}; Dense yields {0, 3, 4, 7, 8, 11, 12, ...}.
/// No pair of members differs by 0 or +-2, so the continuum Gram is the
/// identity. If n_spins is given, winding numbers >= N/2 are rejected
/// (they alias on a discrete geometry).
RegisterLayout select_register_modes(std::size_t count, ModeScheme scheme, double length,
                                     std::optional<std::size_t> n_spins = std::nullopt,
                                     double crosstalk_budget = 1e-2);

/// Entry (i, j) = mode_overlap(geometry, k_j - k_i); Hermitian with unit
/// diagonal.
Eigen::MatrixXcd gram_matrix(const EnsembleGeometry& geometry,
                             const std::vector<double>& wavenumbers);

/// Layout whose Gram is the exact discrete one of the given geometry.
RegisterLayout discrete_layout(const EnsembleGeometry& geometry, std::vector<int> windings,
                               double crosstalk_budget = 1e-2);

struct GradientPulseParams {
  double delta_B = 0.0;   // field difference across the sample, T
  double gradient = 0.0;  // delta_B / L, T/m
};

/// Field difference required so that a gradient pulse of duration tau shifts
/// every stored wavenumber by +target_k:  delta_B = -k L hbar / (m0 tau).
GradientPulseParams gradient_pulse_params(const PhysicalConstants& constants, double length,
                                          double target_k, double tau);

}  // namespace holoreg
