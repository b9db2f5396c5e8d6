#pragma once

#include <complex>
#include <vector>

#include <Eigen/Dense>

#include "holoreg/constants.hpp"
#include "holoreg/device.hpp"
#include "holoreg/ensemble.hpp"
#include "holoreg/expmv.hpp"
#include "holoreg/schedule.hpp"

namespace holoreg {

/// Deterministic enumeration of the bounded-excitation basis over
/// {cavity Fock, CPB level, individual spin flips}.
///
/// Index layout:
///   0            vacuum
///   1            one cavity photon
///   2            CPB excited
///   3 + q        spin q excited
/// and, when two excitations are enabled, starting at B = N + 3:
///   B            two cavity photons
///   B + 1        photon + CPB
///   B + 2 + q    photon + spin q
///   B + 2 + N + q  CPB + spin q
///   B + 2 + 2N + pair(q, r)   spins q < r
class SectorBasis {
 public:
  SectorBasis(std::size_t n_spins, int max_excitations);

  std::size_t dimension() const { return dimension_; }
  std::size_t n_spins() const { return n_spins_; }
  int max_excitations() const { return max_excitations_; }

  std::size_t vacuum() const { return 0; }
  std::size_t cavity() const { return 1; }
  std::size_t cpb() const { return 2; }
  std::size_t spin(std::size_t q) const { return 3 + q; }
  std::size_t cav_cav() const { return two_base_; }
  std::size_t cav_cpb() const { return two_base_ + 1; }
  std::size_t cav_spin(std::size_t q) const { return two_base_ + 2 + q; }
  std::size_t cpb_spin(std::size_t q) const { return two_base_ + 2 + n_spins_ + q; }
  std::size_t spin_pair(std::size_t q, std::size_t r) const;  // q < r

 private:
  std::size_t n_spins_;
  int max_excitations_;
  std::size_t two_base_;
  std::size_t dimension_;
};

/// Pure state over a SectorBasis plus the probability lost to decay.
struct SectorState {
  Eigen::VectorXcd amplitudes;
  double norm_deficit = 0.0;

  double norm_squared() const { return amplitudes.squaredNorm(); }
};

struct ExactEngineOptions {
  int max_excitations = 1;
  /// Uniform spin detuning while idling; defaults to 100 sqrt(N) g_bar
  /// when left at 0 (suppresses off-resonant exchange to 1e-4).
  double idle_detuning = 0.0;
  double cpb_idle_detuning = 0.0;
  double krylov_tol = 1e-13;
  int krylov_dim = 36;
  /// Per-spin static detuning offsets (inhomogeneous broadening draw).
  std::vector<double> static_detunings;
};

/// Ground-truth propagator for N discrete spins + cavity + CPB in bounded
/// total-excitation sectors. Evolution is piecewise: within each segment the
/// generator is time independent and is applied by a Krylov exponential.
class ExactEngine {
 public:
  ExactEngine(const PhysicalConstants& constants, const DeviceParams& device,
              const EnsembleGeometry& geometry, ExactEngineOptions options = {});

  const SectorBasis& basis() const { return basis_; }
  const EnsembleGeometry& geometry() const { return geometry_; }
  double idle_detuning() const { return options_.idle_detuning; }
  double collective_rabi_rate() const { return root_n_gbar_; }

  SectorState vacuum_state() const;
  SectorState cavity_photon_state() const;
  SectorState cpb_excited_state() const;
  SectorState two_photon_state() const;
  /// b^dag(k) |vac>.
  SectorState spin_wave_state(double wavenumber) const;
  /// alpha |vac> + beta * b^dag(k) |vac>, normalized.
  SectorState stored_qubit_state(std::complex<double> alpha, std::complex<double> beta,
                                 double wavenumber) const;

  void evolve(SectorState& state, const PulseSchedule& schedule);
  void evolve(SectorState& state, const Segment& segment);

  /// <b^dag(k) b(k)> of the state.
  double mode_occupation(const SectorState& state, double wavenumber) const;
  double cavity_population(const SectorState& state) const;
  double cpb_population(const SectorState& state) const;
  std::complex<double> overlap(const SectorState& a, const SectorState& b) const;

  /// <H> for the segment's generator (kappa ignored); for conservation checks.
  double expected_energy(const SectorState& state, const Segment& segment) const;

  /// +1 between echo pairs, -1 inside an open pair. Mode occupations are
  /// only physical at even parity.
  int echo_parity() const { return echo_sign_; }

  const ExpmvStats& stats() const { return stats_; }

 private:
  struct SegmentParams {
    double duration = 0.0;
    double spin_detuning = 0.0;    // uniform deliberate part
    double gradient_rate = 0.0;    // detuning slope vs z: delta_q += rate * z_q
    double cpb_detuning = 0.0;
    bool couplings_on = true;
    double detuning_sign = 1.0;    // echo parity applied to static offsets
  };

  void apply_hamiltonian(const SegmentParams& p, const Eigen::VectorXcd& x,
                         Eigen::VectorXcd& y) const;
  void evolve_params(SectorState& state, const SegmentParams& p);
  void apply_cpb_drive(SectorState& state, const CpbDrive& drive);
  void apply_echo_pulse(SectorState& state, const EchoPulse& pulse);
  SegmentParams idle_params(double duration) const;
  /// Image of b(k) applied to the state, over the basis one sector down.
  Eigen::VectorXcd apply_lowering(const SectorState& state, double wavenumber) const;

  PhysicalConstants constants_;
  DeviceParams device_;
  EnsembleGeometry geometry_;
  ExactEngineOptions options_;
  SectorBasis basis_;
  double root_n_gbar_;
  int echo_sign_ = 1;
  double open_echo_phase_ = 0.0;
  ExpmvStats stats_;
};

}  // namespace holoreg
