#pragma once

#include <complex>
#include <map>
#include <string>
#include <vector>

#include "holoreg/constants.hpp"
#include "holoreg/device.hpp"
#include "holoreg/ensemble.hpp"
#include "holoreg/modes.hpp"
#include "holoreg/register_engine.hpp"
#include "holoreg/schedule.hpp"

namespace holoreg {

/// One abstract step of a register program.
struct ProgramStep {
  enum class Kind { Store, Retrieve, Gate1, Gate2, Cool, Idle, EchoIdle };
  Kind kind = Kind::Idle;
  std::string qubit;   // Store/Retrieve/Gate1; control for Gate2
  std::string qubit2;  // Gate2 target
  int mode = -1;       // layout mode index for Store/Cool
  double angle = 0.0, axis_phase = 0.0, axis_z = 0.0;  // Gate1
  double duration = 0.0;                               // Idle/EchoIdle
  double echo_interval = 0.0, eps1 = 0.0, eps2 = 0.0;  // EchoIdle

  static ProgramStep store(std::string qubit, int mode);
  static ProgramStep retrieve(std::string qubit);
  static ProgramStep gate1(std::string qubit, double angle, double axis_phase,
                           double axis_z = 0.0);
  static ProgramStep gate2(std::string control, std::string target);
  static ProgramStep cool(int mode);
  static ProgramStep idle(double duration);
  static ProgramStep echo_idle(double duration, double interval, double eps1 = 0.0,
                               double eps2 = 0.0);
};

/// Abstract register program over named qubits. The qubit-to-mode mapping is
/// fixed by the Store steps and must be injective.
struct RegisterProgram {
  std::vector<ProgramStep> steps;
  void validate(const RegisterLayout& layout) const;
};

struct CompileOptions {
  double gradient_duration = 0.0;  // s; 0 = pick 0.02 / exchange rate
  double idle_detuning = 0.0;      // must match the engine; 0 = 100 sqrt(N) g_bar
  double cpb_idle_detuning = 0.0;
  WindowProfile window_profile = WindowProfile::Square;
  double max_field_difference = std::numeric_limits<double>::infinity();
};

/// Compiled schedule plus the deterministic frame bookkeeping: the phase
/// (and decay) factor each qubit's |1> amplitude carries relative to an
/// ideal instantaneous-transfer protocol, and where each qubit ends up.
struct CompiledProtocol {
  PulseSchedule schedule;
  std::map<std::string, std::complex<double>> qubit_phases;
  std::map<std::string, std::string> qubit_locations;  // "cavity", "cpb", or mode index
};

/// Lowers each store/retrieve to the three-segment recipe
/// [(-k_i) gradient, resonance window of pi/(2 sqrt(N) g_bar), (+k_i) gradient]
/// and each two-qubit gate to the swap-to-CPB / swap-to-cavity /
/// conditional-phase / unwind sequence. Deterministic.
CompiledProtocol compile(const RegisterProgram& program, const RegisterLayout& layout,
                         const PhysicalConstants& constants, const DeviceParams& device,
                         double exchange_rate, const CompileOptions& options = {});

/// Inserts echo-pulse pairs at the T and 2T boundaries of every idle period
/// of at least 2T. The pulse at T carries area error eps2, the pulse at 2T
/// carries eps1. Only Wait segments are transformed.
PulseSchedule echo_maintenance(const PulseSchedule& schedule, double interval, double eps1,
                               double eps2);

/// GateOp lowering of the same program for the register engine.
std::vector<GateOp> lower_to_gates(const RegisterProgram& program);

struct TimeTrace {
  std::vector<double> times;
  std::vector<double> values;
};

struct ClassicalDemoSpec {
  double tilt_angle = 0.05;            // rad; must stay in linear response
  std::vector<int> store_windings;     // final winding number per excitation
  std::vector<int> retrieve_windings;  // which stored excitations to revive
  double event_spacing = 1.0;          // s between trace events (labels only)
};

struct ClassicalDemoResult {
  TimeTrace trace;                       // |k=0 amplitude| vs event time
  std::vector<double> stored_amplitudes; // |amplitude| right after each tilt
  std::vector<double> revived_peaks;     // |k=0| at each selective retrieval
  std::vector<double> leakage_peaks;     // |k=0| contributed by the others alone
};

/// Classical storage/retrieval demonstration: tilts create transverse
/// magnetization, gradient pulses park it in spin-wave modes, a retrieval
/// gradient converts a chosen mode back to uniform magnetization whose
/// inductive signal is the emitted trace.
ClassicalDemoResult classical_echo_demo(const EnsembleGeometry& geometry,
                                        const ClassicalDemoSpec& spec);

}  // namespace holoreg
