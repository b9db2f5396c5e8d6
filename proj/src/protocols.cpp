#include "holoreg/protocols.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

#include "holoreg/classical.hpp"
#include "holoreg/errors.hpp"

namespace holoreg {

namespace {
constexpr std::complex<double> im(0.0, 1.0);

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}
}  // namespace

double segment_duration(const Segment& segment) {
  return std::visit(
      [](const auto& s) -> double {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, EchoPulse>)
          return 0.0;
        else if constexpr (std::is_same_v<T, CpbDrive>)
          return 0.0;  // delta pulse; the duration field is bookkeeping
        else
          return s.duration;
      },
      segment);
}

const char* segment_kind_name(const Segment& segment) {
  switch (segment.index()) {
    case 0: return "gradient";
    case 1: return "window";
    case 2: return "cpb_window";
    case 3: return "cpb_drive";
    case 4: return "echo";
    default: return "wait";
  }
}

double PulseSchedule::total_duration() const {
  double total = 0.0;
  for (const auto& s : segments) total += segment_duration(s);
  return total;
}

double PulseSchedule::net_gradient_wavenumber() const {
  double net = 0.0;
  for (const auto& s : segments)
    if (const auto* g = std::get_if<GradientPulse>(&s)) net += g->delta_k;
  return net;
}

void PulseSchedule::validate() const {
  for (const auto& s : segments) {
    double d = 0.0;
    if (const auto* g = std::get_if<GradientPulse>(&s)) d = g->duration;
    else if (const auto* w = std::get_if<ResonanceWindow>(&s)) d = w->duration;
    else if (const auto* c = std::get_if<CpbWindow>(&s)) d = c->duration;
    else if (const auto* dr = std::get_if<CpbDrive>(&s)) d = dr->duration;
    else if (const auto* t = std::get_if<Wait>(&s)) d = t->duration;
    if (d < 0.0) throw ConfigError("segment durations must be non-negative");
  }
}

std::string PulseSchedule::to_text() const {
  std::ostringstream out;
  for (const auto& s : segments) {
    if (const auto* g = std::get_if<GradientPulse>(&s)) {
      out << "gradient delta_k=" << fmt(g->delta_k) << " duration=" << fmt(g->duration) << "\n";
    } else if (const auto* w = std::get_if<ResonanceWindow>(&s)) {
      out << "window duration=" << fmt(w->duration)
          << " profile=" << (w->profile == WindowProfile::Square ? "square" : "ramp") << "\n";
    } else if (const auto* c = std::get_if<CpbWindow>(&s)) {
      out << "cpb_window duration=" << fmt(c->duration) << " detuning=" << fmt(c->detuning)
          << "\n";
    } else if (const auto* d = std::get_if<CpbDrive>(&s)) {
      out << "cpb_drive angle=" << fmt(d->angle) << " axis_phase=" << fmt(d->axis_phase)
          << " axis_z=" << fmt(d->axis_z) << " duration=" << fmt(d->duration) << "\n";
    } else if (const auto* e = std::get_if<EchoPulse>(&s)) {
      out << "echo error=" << fmt(e->error) << " phase=" << fmt(e->phase) << "\n";
    } else if (const auto* t = std::get_if<Wait>(&s)) {
      out << "wait duration=" << fmt(t->duration) << "\n";
    }
  }
  return out.str();
}

PulseSchedule PulseSchedule::from_text(const std::string& text) {
  PulseSchedule schedule;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string kind;
    ls >> kind;
    std::map<std::string, double> kv;
    std::string token;
    while (ls >> token) {
      const auto eq = token.find('=');
      if (eq == std::string::npos) throw ConfigError("bad schedule line: " + line);
      kv[token.substr(0, eq)] = std::stod(token.substr(eq + 1));
    }
    if (kind == "gradient") {
      schedule.segments.push_back(GradientPulse{kv.at("delta_k"), kv.at("duration")});
    } else if (kind == "window") {
      schedule.segments.push_back(ResonanceWindow{kv.at("duration")});
    } else if (kind == "cpb_window") {
      schedule.segments.push_back(CpbWindow{kv.at("duration"), kv.at("detuning")});
    } else if (kind == "cpb_drive") {
      schedule.segments.push_back(
          CpbDrive{kv.at("angle"), kv.at("axis_phase"), kv.at("axis_z"), kv.at("duration")});
    } else if (kind == "echo") {
      schedule.segments.push_back(EchoPulse{kv.at("error"), kv.at("phase")});
    } else if (kind == "wait") {
      schedule.segments.push_back(Wait{kv.at("duration")});
    } else {
      throw ConfigError("unknown schedule segment: " + kind);
    }
  }
  return schedule;
}

ProgramStep ProgramStep::store(std::string qubit, int mode) {
  ProgramStep s;
  s.kind = Kind::Store;
  s.qubit = std::move(qubit);
  s.mode = mode;
  return s;
}
ProgramStep ProgramStep::retrieve(std::string qubit) {
  ProgramStep s;
  s.kind = Kind::Retrieve;
  s.qubit = std::move(qubit);
  return s;
}
ProgramStep ProgramStep::gate1(std::string qubit, double angle, double axis_phase,
                               double axis_z) {
  ProgramStep s;
  s.kind = Kind::Gate1;
  s.qubit = std::move(qubit);
  s.angle = angle;
  s.axis_phase = axis_phase;
  s.axis_z = axis_z;
  return s;
}
ProgramStep ProgramStep::gate2(std::string control, std::string target) {
  ProgramStep s;
  s.kind = Kind::Gate2;
  s.qubit = std::move(control);
  s.qubit2 = std::move(target);
  return s;
}
ProgramStep ProgramStep::cool(int mode) {
  ProgramStep s;
  s.kind = Kind::Cool;
  s.mode = mode;
  return s;
}
ProgramStep ProgramStep::idle(double duration) {
  ProgramStep s;
  s.kind = Kind::Idle;
  s.duration = duration;
  return s;
}
ProgramStep ProgramStep::echo_idle(double duration, double interval, double eps1, double eps2) {
  ProgramStep s;
  s.kind = Kind::EchoIdle;
  s.duration = duration;
  s.echo_interval = interval;
  s.eps1 = eps1;
  s.eps2 = eps2;
  return s;
}

void RegisterProgram::validate(const RegisterLayout& layout) const {
  std::map<std::string, int> where;  // qubit -> mode
  std::map<int, std::string> holder;
  for (const auto& step : steps) {
    switch (step.kind) {
      case ProgramStep::Kind::Store: {
        if (step.mode < 0 || static_cast<std::size_t>(step.mode) >= layout.size())
          throw ConfigError("store targets a mode outside the layout");
        if (holder.count(step.mode) && holder[step.mode] != step.qubit)
          throw ConfigError("qubit-to-mode mapping must be injective: mode " +
                            std::to_string(step.mode) + " already holds " + holder[step.mode]);
        if (where.count(step.qubit))
          throw ConfigError("qubit " + step.qubit + " is already stored");
        where[step.qubit] = step.mode;
        holder[step.mode] = step.qubit;
        break;
      }
      case ProgramStep::Kind::Retrieve: {
        if (!where.count(step.qubit))
          throw ConfigError("retrieve of unknown qubit " + step.qubit);
        holder.erase(where[step.qubit]);
        where.erase(step.qubit);
        break;
      }
      case ProgramStep::Kind::Gate2: {
        if (!where.count(step.qubit) || !where.count(step.qubit2))
          throw ConfigError("two-qubit gate on qubits that are not stored");
        break;
      }
      case ProgramStep::Kind::Cool: {
        if (step.mode < 0 || static_cast<std::size_t>(step.mode) >= layout.size())
          throw ConfigError("cool targets a mode outside the layout");
        break;
      }
      default:
        break;
    }
  }
}

namespace {

/// Tracks each qubit's location and accumulated frame factor while the
/// compiler emits segments.
struct FrameWalk {
  // -2 CPB, -1 cavity, >= 0 mode index
  std::map<std::string, int> where;
  std::map<std::string, std::complex<double>> phase;
  double idle_detuning;
  double cpb_idle_detuning;
  double kappa;
  int echo_sign = 1;

  void touch(const std::string& qubit, int loc) {
    if (!where.count(qubit)) {
      where[qubit] = loc;
      phase[qubit] = 1.0;
    }
  }

  /// Deliberate free-precession phases over a timed segment.
  void elapse(double duration) {
    for (auto& [name, loc] : where) {
      if (loc >= 0)
        phase[name] *= std::polar(1.0, -echo_sign * idle_detuning * duration);
      else if (loc == -2)
        phase[name] *= std::polar(1.0, -cpb_idle_detuning * duration);
      else if (kappa > 0)
        phase[name] *= std::exp(-0.5 * kappa * duration);
    }
  }

  void transfer(const std::string& qubit, int to, std::complex<double> factor) {
    where.at(qubit) = to;
    phase.at(qubit) *= factor;
  }
};

}  // namespace

CompiledProtocol compile(const RegisterProgram& program, const RegisterLayout& layout,
                         const PhysicalConstants& constants, const DeviceParams& device,
                         double exchange_rate, const CompileOptions& options) {
  program.validate(layout);
  (void)constants;

  CompiledProtocol out;
  out.schedule.max_field_difference = options.max_field_difference;

  const double window = 0.5 * std::numbers::pi / exchange_rate;
  const double tau_g =
      options.gradient_duration > 0 ? options.gradient_duration : 0.02 / exchange_rate;
  FrameWalk walk;
  walk.idle_detuning =
      options.idle_detuning > 0 ? options.idle_detuning : 100.0 * exchange_rate;
  walk.cpb_idle_detuning = options.cpb_idle_detuning;
  walk.kappa = device.kappa;

  const CzCalibration cz = calibrate_cz();
  const double g = device.g_cpb;

  auto emit = [&](Segment segment) {
    walk.elapse(segment_duration(segment));
    out.schedule.segments.push_back(std::move(segment));
  };

  // three-segment selective swap: the cavity exchanges with mode i only
  auto emit_swap_triple = [&](int mode, const std::string& qubit, bool storing) {
    const double k = layout.wavenumber(static_cast<std::size_t>(mode));
    emit(GradientPulse{-k, tau_g});
    walk.elapse(window);
    out.schedule.segments.push_back(ResonanceWindow{window, options.window_profile});
    if (storing)
      walk.transfer(qubit, mode, -im);
    else
      walk.transfer(qubit, -1, -im);
    emit(GradientPulse{+k, tau_g});
  };

  auto emit_cpb_transfer = [&](const std::string& qubit, bool to_cpb) {
    if (g <= 0) throw ConfigError("program uses the CPB but g_cpb is zero");
    const double quarter = 0.5 * std::numbers::pi / g;
    walk.elapse(quarter);
    out.schedule.segments.push_back(CpbWindow{quarter, 0.0});
    walk.transfer(qubit, to_cpb ? -2 : -1, -im);
  };

  for (const auto& step : program.steps) {
    switch (step.kind) {
      case ProgramStep::Kind::Store:
        walk.touch(step.qubit, -1);
        emit_swap_triple(step.mode, step.qubit, true);
        break;
      case ProgramStep::Kind::Retrieve:
        emit_swap_triple(walk.where.at(step.qubit), step.qubit, false);
        break;
      case ProgramStep::Kind::Gate1: {
        const int mode = walk.where.at(step.qubit);
        emit_swap_triple(mode, step.qubit, false);
        emit_cpb_transfer(step.qubit, true);
        emit(CpbDrive{step.angle, step.axis_phase, step.axis_z, 0.0});
        emit_cpb_transfer(step.qubit, false);
        emit_swap_triple(mode, step.qubit, true);
        break;
      }
      case ProgramStep::Kind::Gate2: {
        if (g <= 0) throw ConfigError("program uses the CPB but g_cpb is zero");
        const int mc = walk.where.at(step.qubit);
        const int mt = walk.where.at(step.qubit2);
        emit_swap_triple(mc, step.qubit, false);
        emit_cpb_transfer(step.qubit, true);
        emit_swap_triple(mt, step.qubit2, false);
        // calibrated conditional phase: two detuned windows + z rotation
        walk.elapse(cz.t1 / g);
        out.schedule.segments.push_back(CpbWindow{cz.t1 / g, cz.delta1 * g});
        emit(CpbDrive{-cz.phi, 0.0, 1.0, 0.0});  // z rotation by phi
        walk.elapse(cz.t2 / g);
        out.schedule.segments.push_back(CpbWindow{cz.t2 / g, cz.delta2 * g});
        walk.phase[step.qubit] *= std::polar(1.0, cz.local_phase_cpb);
        walk.phase[step.qubit2] *= std::polar(1.0, cz.local_phase_cavity);
        emit_swap_triple(mt, step.qubit2, true);
        emit_cpb_transfer(step.qubit, false);
        emit_swap_triple(mc, step.qubit, true);
        break;
      }
      case ProgramStep::Kind::Cool:
        throw ConfigError("cooling is a register-engine op; it has no pulse-level form");
      case ProgramStep::Kind::Idle:
        emit(Wait{step.duration});
        break;
      case ProgramStep::Kind::EchoIdle: {
        PulseSchedule idle;
        idle.segments.push_back(Wait{step.duration});
        const PulseSchedule maintained =
            echo_maintenance(idle, step.echo_interval, step.eps1, step.eps2);
        for (const auto& seg : maintained.segments) {
          if (std::get_if<EchoPulse>(&seg)) {
            walk.echo_sign = -walk.echo_sign;
            out.schedule.segments.push_back(seg);
          } else {
            emit(seg);
          }
        }
        break;
      }
    }
  }

  out.qubit_phases = walk.phase;
  for (const auto& [name, loc] : walk.where)
    out.qubit_locations[name] = loc == -2 ? "cpb" : (loc == -1 ? "cavity" : std::to_string(loc));
  return out;
}

PulseSchedule echo_maintenance(const PulseSchedule& schedule, double interval, double eps1,
                               double eps2) {
  if (interval <= 0) throw ConfigError("echo interval must be positive");
  PulseSchedule out;
  out.max_field_difference = schedule.max_field_difference;
  for (const auto& segment : schedule.segments) {
    const auto* wait = std::get_if<Wait>(&segment);
    if (!wait || wait->duration < 2.0 * interval) {
      out.segments.push_back(segment);
      continue;
    }
    double remaining = wait->duration;
    while (remaining >= 2.0 * interval) {
      out.segments.push_back(Wait{interval});
      out.segments.push_back(EchoPulse{eps2, 0.0});
      out.segments.push_back(Wait{interval});
      out.segments.push_back(EchoPulse{eps1, 0.0});
      remaining -= 2.0 * interval;
    }
    if (remaining > 0) out.segments.push_back(Wait{remaining});
  }
  return out;
}

std::vector<GateOp> lower_to_gates(const RegisterProgram& program) {
  std::vector<GateOp> gates;
  std::map<std::string, int> where;
  for (const auto& step : program.steps) {
    switch (step.kind) {
      case ProgramStep::Kind::Store:
        gates.push_back(GateOp::write(step.qubit, step.mode));
        where[step.qubit] = step.mode;
        break;
      case ProgramStep::Kind::Retrieve:
        gates.push_back(GateOp::read(step.qubit));
        where.erase(step.qubit);
        break;
      case ProgramStep::Kind::Gate1:
        gates.push_back(GateOp::one_qubit(step.qubit, step.angle, step.axis_phase, step.axis_z));
        break;
      case ProgramStep::Kind::Gate2:
        gates.push_back(GateOp::two_qubit(step.qubit, step.qubit2));
        break;
      case ProgramStep::Kind::Cool:
        gates.push_back(GateOp::cool(step.mode));
        break;
      default:
        break;  // idles are free in the abstract register model
    }
  }
  return gates;
}

ClassicalDemoResult classical_echo_demo(const EnsembleGeometry& geometry,
                                        const ClassicalDemoSpec& spec) {
  if (spec.tilt_angle < 0 || spec.tilt_angle > 0.1)
    throw ConfigError("tilt angle must stay within linear response (<= 0.1 rad)");
  const double unit_k = two_pi / geometry.length();
  const auto n_exc = spec.store_windings.size();

  // gradient increments so that excitation i ends at store_windings[i]
  std::vector<int> increments(n_exc, 0);
  for (std::size_t i = 0; i + 1 < n_exc; ++i)
    increments[i] = spec.store_windings[i] - spec.store_windings[i + 1];
  if (n_exc > 0) increments[n_exc - 1] = spec.store_windings[n_exc - 1];

  // the dynamics is run once with all tilts and once per leave-one-out mask
  // to attribute retrieval leakage to the spectators
  auto run_sequence = [&](const std::vector<bool>& tilt_mask) {
    ClassicalSpinWave wave(geometry);
    ClassicalDemoResult partial;
    double t = 0.0;
    auto sample = [&]() {
      partial.trace.times.push_back(t);
      partial.trace.values.push_back(std::abs(wave.mode_amplitude(0.0)));
      t += spec.event_spacing;
    };
    sample();
    for (std::size_t i = 0; i < n_exc; ++i) {
      if (tilt_mask[i]) wave.tilt(spec.tilt_angle);
      partial.stored_amplitudes.push_back(std::abs(wave.mode_amplitude(0.0)));
      sample();
      wave.gradient(increments[i] * unit_k);
      sample();
    }
    for (int w : spec.retrieve_windings) {
      wave.gradient(-w * unit_k);
      partial.revived_peaks.push_back(std::abs(wave.mode_amplitude(0.0)));
      sample();
      wave.gradient(+w * unit_k);
      sample();
    }
    return partial;
  };

  ClassicalDemoResult result = run_sequence(std::vector<bool>(n_exc, true));
  for (std::size_t target = 0; target < spec.retrieve_windings.size(); ++target) {
    // which stored excitation is being revived here?
    std::vector<bool> mask(n_exc, true);
    for (std::size_t i = 0; i < n_exc; ++i)
      if (spec.store_windings[i] == spec.retrieve_windings[target]) mask[i] = false;
    const ClassicalDemoResult others = run_sequence(mask);
    result.leakage_peaks.push_back(others.revived_peaks[target]);
  }
  return result;
}

}  // namespace holoreg
