#pragma once

#include <complex>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "holoreg/expmv.hpp"
#include "holoreg/modes.hpp"

namespace holoreg {

/// Pure state of the truncated multimode register.
/// Site 0 is the CPB (dim 2), site 1 the cavity, sites 2.. the register
/// modes (each an oscillator truncated to `fock_levels` levels).
struct RegisterState {
  Eigen::VectorXcd amplitudes;
  double norm_deficit = 0.0;
};

/// Product of per-site diagonal Fock distributions; exact representation of
/// thermal mixtures and of everything swap + decay cycles do to them.
struct ThermalRegisterState {
  std::vector<Eigen::VectorXd> distributions;  // same site order as RegisterState

  double mean_occupation(std::size_t site) const;
  /// Draw a pure Fock configuration (site occupation per site).
  std::vector<int> sample(std::mt19937_64& rng) const;
};

/// Abstract register instruction.
struct GateOp {
  enum class Kind { Write, Swap, OneQubit, TwoQubit, Cool, Read };
  Kind kind = Kind::Swap;
  int mode_a = -1;  // target mode (Write/Swap/Cool/Read, control for TwoQubit)
  int mode_b = -1;  // TwoQubit target
  double angle = 0.0, axis_phase = 0.0, axis_z = 0.0;  // OneQubit parameters
  std::string qubit;  // label for phase bookkeeping

  static GateOp write(std::string qubit, int mode);
  static GateOp read(std::string qubit);
  static GateOp swap(int mode);
  static GateOp one_qubit(std::string qubit, double angle, double axis_phase,
                          double axis_z = 0.0);
  static GateOp two_qubit(std::string control_qubit, std::string target_qubit);
  static GateOp cool(int mode);
};

struct OpLogEntry {
  std::string op;
  double duration = 0.0;       // physical time consumed by the op
  double norm = 1.0;           // squared norm after the op
  double leakage = 0.0;        // top-Fock-level population after the op
  std::vector<double> occupations;  // per-site occupation after the op
};

struct ProgramResult {
  std::vector<OpLogEntry> log;
  /// Deterministic phase each qubit's |1> amplitude has accumulated relative
  /// to the ideal circuit; apply diag(1, conj(phase)) to undo.
  std::map<std::string, std::complex<double>> qubit_phases;
  /// Where each qubit ended up: "cpb", "cavity", or the mode index.
  std::map<std::string, std::string> qubit_locations;
};

/// Calibrated conditional-phase pulse sequence: two Jaynes-Cummings windows
/// separated by a CPB z rotation, with detunings and times (in units of
/// 1/g_cpb) chosen so the net map on {CPB x cavity} is diagonal with
/// conditional phase pi.
struct CzCalibration {
  double delta1 = 0.0, t1 = 0.0;  // first window detuning (units g) / time (units 1/g)
  double phi = 0.0;               // interleaved CPB z rotation
  double delta2 = 0.0, t2 = 0.0;
  double residual = 1.0;          // off-diagonal leakage + phase error of the net map
  double local_phase_cpb = 0.0;   // alpha: phase of |e,0>
  double local_phase_cavity = 0.0;  // beta: phase of |g,1>

  double duration_over_g() const { return t1 + t2; }
};

/// Solves for the window parameters; pure arithmetic on the two
/// excitation manifolds, independent of truncation.
CzCalibration calibrate_cz();

struct RegisterEngineOptions {
  int fock_levels = 3;
  double leakage_limit = 1e-4;
  bool crosstalk = false;      // Gram-weighted mixing during swaps
  double kappa = 0.0;          // rad/s
  double exchange_rate = 1.0;  // sqrt(N) g_bar, rad/s
  double g_cpb = 0.0;          // rad/s; 0 disables CPB-cavity ops
  double gradient_duration = 0.0;  // per (k)-pulse, for decay bookkeeping
  double cool_target_ratio = 1e-6;
  double cool_wait_factor = 10.0;  // wait = factor / kappa per cycle
};

/// Scalable simulator of the register as independent truncated oscillators
/// plus the cavity oscillator and the CPB two-level system.
class RegisterEngine {
 public:
  RegisterEngine(RegisterLayout layout, RegisterEngineOptions options);

  const RegisterLayout& layout() const { return layout_; }
  const RegisterEngineOptions& options() const { return options_; }
  std::size_t n_sites() const { return dims_.size(); }
  std::size_t n_modes() const { return layout_.size(); }
  std::size_t dimension() const { return total_dim_; }
  static constexpr std::size_t cpb_site = 0;
  static constexpr std::size_t cavity_site = 1;
  std::size_t mode_site(std::size_t mode) const { return 2 + mode; }

  RegisterState vacuum_state() const;
  /// alpha |0> + beta |1> placed on one site (cavity or mode), rest vacuum.
  RegisterState qubit_state(std::size_t site, std::complex<double> alpha,
                            std::complex<double> beta) const;
  RegisterState fock_state(const std::vector<int>& occupations) const;

  /// Full state exchange between mode i and the cavity. With crosstalk
  /// enabled the exchange couples spectator modes with their Gram weights.
  void swap_mode_cavity(RegisterState& state, std::size_t mode);
  /// Exact 2x2 unitary on the CPB.
  void cpb_one_qubit(RegisterState& state, const Eigen::Matrix2cd& u);
  void cpb_one_qubit(RegisterState& state, double angle, double axis_phase,
                     double axis_z = 0.0);
  /// Full single-excitation transfer CPB <-> cavity (resonant JC half cycle).
  void cpb_cavity_swap(RegisterState& state);
  /// Calibrated CZ between the CPB qubit and the cavity {0,1} qubit.
  void cpb_cavity_conditional_phase(RegisterState& state);
  /// Cavity amplitude decay for a time interval.
  void cavity_decay(RegisterState& state, double duration);
  /// Swap-and-decay cycles until the mode occupation drops below
  /// target_ratio x initial; returns the cycle count.
  int cool_mode(RegisterState& state, std::size_t mode);
  int cool_mode(ThermalRegisterState& state, std::size_t mode);
  static int predicted_cool_cycles(double target_ratio, double wait_factor);

  /// Random collective z-phase kick realizing dephasing at rate gamma over
  /// the duration in the Monte Carlo sense.
  void dephasing_kick(RegisterState& state, std::size_t site, double gamma,
                      double duration, std::mt19937_64& rng);

  ProgramResult run_program(RegisterState& state, const std::vector<GateOp>& program);

  double site_occupation(const RegisterState& state, std::size_t site) const;
  double mode_occupation(const RegisterState& state, std::size_t mode) const {
    return site_occupation(state, mode_site(mode));
  }
  double truncation_leakage(const RegisterState& state) const;
  Eigen::MatrixXcd reduced_density(const RegisterState& state,
                                   const std::vector<std::size_t>& sites) const;
  std::complex<double> overlap(const RegisterState& a, const RegisterState& b) const;

  ThermalRegisterState thermal_product_state(const std::vector<double>& mode_mean_occupations) const;
  RegisterState state_from_occupations(const std::vector<int>& occupations) const {
    return fock_state(occupations);
  }

  const CzCalibration& cz() const { return cz_; }
  double swap_duration() const;      // resonance window + two gradient pulses
  double cpb_swap_duration() const;  // JC half cycle

 private:
  void apply_one_site(RegisterState& state, const Eigen::MatrixXcd& u, std::size_t site) const;
  void apply_two_site(RegisterState& state, const Eigen::MatrixXcd& u, std::size_t site_a,
                      std::size_t site_b) const;
  void check_leakage(RegisterState& state, const char* context) const;
  Eigen::MatrixXcd fock_lowering() const;
  /// JC window on (CPB, cavity): exp(-i t (delta n_e + g (a sig+ + a^dag sig-)))
  /// with optional cavity damping.
  Eigen::MatrixXcd jc_window(double detuning, double time, double kappa_over_g) const;

  RegisterLayout layout_;
  RegisterEngineOptions options_;
  std::vector<std::size_t> dims_;
  std::vector<std::size_t> strides_;
  std::size_t total_dim_ = 0;
  CzCalibration cz_;
};

}  // namespace holoreg
