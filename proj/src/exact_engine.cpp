#include "holoreg/exact_engine.hpp"

#include <cmath>

#include "holoreg/errors.hpp"
#include "holoreg/modes.hpp"

namespace holoreg {

SectorBasis::SectorBasis(std::size_t n_spins, int max_excitations)
    : n_spins_(n_spins), max_excitations_(max_excitations) {
  if (max_excitations != 1 && max_excitations != 2)
    throw ConfigError("exact engine supports 1 or 2 excitations");
  two_base_ = n_spins_ + 3;
  if (max_excitations == 1) {
    dimension_ = two_base_;
  } else {
    dimension_ = two_base_ + 2 + 2 * n_spins_ + n_spins_ * (n_spins_ - 1) / 2;
  }
}

std::size_t SectorBasis::spin_pair(std::size_t q, std::size_t r) const {
  // lexicographic over pairs q < r
  return two_base_ + 2 + 2 * n_spins_ + q * n_spins_ - q * (q + 1) / 2 + (r - q - 1);
}

ExactEngine::ExactEngine(const PhysicalConstants& constants, const DeviceParams& device,
                         const EnsembleGeometry& geometry, ExactEngineOptions options)
    : constants_(constants),
      device_(device),
      geometry_(geometry),
      options_(std::move(options)),
      basis_(geometry.n_spins(), options_.max_excitations),
      root_n_gbar_(collective_rabi(geometry)) {
  if (options_.idle_detuning == 0.0) options_.idle_detuning = 100.0 * root_n_gbar_;
  if (options_.cpb_idle_detuning == 0.0) options_.cpb_idle_detuning = device_.delta_cpb;
  if (!options_.static_detunings.empty() &&
      options_.static_detunings.size() != geometry.n_spins())
    throw ConfigError("static detuning table must match the spin count");
}

SectorState ExactEngine::vacuum_state() const {
  SectorState s;
  s.amplitudes = Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(basis_.dimension()));
  s.amplitudes[static_cast<Eigen::Index>(basis_.vacuum())] = 1.0;
  return s;
}

SectorState ExactEngine::cavity_photon_state() const {
  SectorState s = vacuum_state();
  s.amplitudes[static_cast<Eigen::Index>(basis_.vacuum())] = 0.0;
  s.amplitudes[static_cast<Eigen::Index>(basis_.cavity())] = 1.0;
  return s;
}

SectorState ExactEngine::cpb_excited_state() const {
  SectorState s = vacuum_state();
  s.amplitudes[static_cast<Eigen::Index>(basis_.vacuum())] = 0.0;
  s.amplitudes[static_cast<Eigen::Index>(basis_.cpb())] = 1.0;
  return s;
}

SectorState ExactEngine::two_photon_state() const {
  if (basis_.max_excitations() < 2)
    throw SimulationError("two-photon state needs the two-excitation sector");
  SectorState s = vacuum_state();
  s.amplitudes[static_cast<Eigen::Index>(basis_.vacuum())] = 0.0;
  s.amplitudes[static_cast<Eigen::Index>(basis_.cav_cav())] = 1.0;
  return s;
}

SectorState ExactEngine::spin_wave_state(double wavenumber) const {
  const ModeVector mode = ModeVector::at(geometry_, wavenumber);
  SectorState s = vacuum_state();
  s.amplitudes[static_cast<Eigen::Index>(basis_.vacuum())] = 0.0;
  for (std::size_t q = 0; q < geometry_.n_spins(); ++q)
    s.amplitudes[static_cast<Eigen::Index>(basis_.spin(q))] =
        mode.coefficients[static_cast<Eigen::Index>(q)];
  return s;
}

SectorState ExactEngine::stored_qubit_state(std::complex<double> alpha,
                                            std::complex<double> beta,
                                            double wavenumber) const {
  SectorState s = spin_wave_state(wavenumber);
  s.amplitudes *= beta;
  s.amplitudes[static_cast<Eigen::Index>(basis_.vacuum())] = alpha;
  s.amplitudes.normalize();
  return s;
}

ExactEngine::SegmentParams ExactEngine::idle_params(double duration) const {
  SegmentParams p;
  p.duration = duration;
  p.spin_detuning = options_.idle_detuning;
  p.cpb_detuning = options_.cpb_idle_detuning;
  p.detuning_sign = static_cast<double>(echo_sign_);
  p.couplings_on = echo_sign_ > 0;
  return p;
}

void ExactEngine::apply_hamiltonian(const SegmentParams& p, const Eigen::VectorXcd& x,
                                    Eigen::VectorXcd& y) const {
  const auto n = geometry_.n_spins();
  const auto& g = geometry_.couplings();
  const auto& z = geometry_.positions();
  const double sign = p.detuning_sign;
  const double g_cpb = p.couplings_on ? device_.g_cpb : 0.0;
  const bool couple = p.couplings_on;
  const std::complex<double> damp(0.0, -0.5 * device_.kappa);

  y.setZero();

  auto spin_detuning = [&](std::size_t q) {
    double d = p.spin_detuning + p.gradient_rate * z[q];
    if (!options_.static_detunings.empty()) d += options_.static_detunings[q];
    return sign * d;
  };

  const auto i_vac = static_cast<Eigen::Index>(basis_.vacuum());
  const auto i_cav = static_cast<Eigen::Index>(basis_.cavity());
  const auto i_cpb = static_cast<Eigen::Index>(basis_.cpb());

  y[i_vac] = 0.0;
  // single-excitation block
  y[i_cav] += damp * x[i_cav] + g_cpb * x[i_cpb];
  y[i_cpb] += sign * p.cpb_detuning * x[i_cpb] + g_cpb * x[i_cav];
  for (std::size_t q = 0; q < n; ++q) {
    const auto iq = static_cast<Eigen::Index>(basis_.spin(q));
    y[iq] += spin_detuning(q) * x[iq];
    if (couple) {
      y[i_cav] += std::conj(g[q]) * x[iq];
      y[iq] += g[q] * x[i_cav];
    }
  }

  if (basis_.max_excitations() < 2) return;

  const double rt2 = std::numbers::sqrt2;
  const auto i_cc = static_cast<Eigen::Index>(basis_.cav_cav());
  const auto i_cb = static_cast<Eigen::Index>(basis_.cav_cpb());

  y[i_cc] += 2.0 * damp * x[i_cc] + rt2 * g_cpb * x[i_cb];
  y[i_cb] += (sign * p.cpb_detuning + damp) * x[i_cb] + rt2 * g_cpb * x[i_cc];

  for (std::size_t q = 0; q < n; ++q) {
    const auto icq = static_cast<Eigen::Index>(basis_.cav_spin(q));
    const auto ibq = static_cast<Eigen::Index>(basis_.cpb_spin(q));
    const double dq = spin_detuning(q);
    y[icq] += (dq + damp) * x[icq] + g_cpb * x[ibq];
    y[ibq] += (dq + sign * p.cpb_detuning) * x[ibq] + g_cpb * x[icq];
    if (couple) {
      // photon + spin q <-> two photons
      y[i_cc] += rt2 * std::conj(g[q]) * x[icq];
      y[icq] += rt2 * g[q] * x[i_cc];
      // CPB + spin q <-> photon + CPB
      y[i_cb] += std::conj(g[q]) * x[ibq];
      y[ibq] += g[q] * x[i_cb];
    }
  }

  if (couple) {
    for (std::size_t q = 0; q < n; ++q) {
      const auto icq = static_cast<Eigen::Index>(basis_.cav_spin(q));
      for (std::size_t r = q + 1; r < n; ++r) {
        const auto iqr = static_cast<Eigen::Index>(basis_.spin_pair(q, r));
        const auto icr = static_cast<Eigen::Index>(basis_.cav_spin(r));
        // photon + spin r <-> spins (q, r): exchange on spin q
        y[icr] += std::conj(g[q]) * x[iqr];
        y[iqr] += g[q] * x[icr];
        // photon + spin q <-> spins (q, r): exchange on spin r
        y[icq] += std::conj(g[r]) * x[iqr];
        y[iqr] += g[r] * x[icq];
      }
    }
  }
  for (std::size_t q = 0; q < n; ++q) {
    const double dq = spin_detuning(q);
    for (std::size_t r = q + 1; r < n; ++r) {
      const auto iqr = static_cast<Eigen::Index>(basis_.spin_pair(q, r));
      y[iqr] += (dq + spin_detuning(r)) * x[iqr];
    }
  }
}

void ExactEngine::evolve_params(SectorState& state, const SegmentParams& p) {
  if (p.duration == 0.0) return;
  if (p.duration < 0.0) throw SimulationError("segment durations must be non-negative");
  ApplyFn minus_i_h = [this, &p](const Eigen::VectorXcd& x, Eigen::VectorXcd& y) {
    apply_hamiltonian(p, x, y);
    y *= std::complex<double>(0.0, -1.0);
  };
  ExpmvOptions opts;
  opts.tol = options_.krylov_tol;
  opts.krylov_dim = options_.krylov_dim;
  const double before = state.norm_squared();
  state.amplitudes = expmv(minus_i_h, p.duration, state.amplitudes, opts, &stats_);
  const double after = state.norm_squared();
  if (after > before + 1e-9)
    throw SimulationError("propagation gained norm beyond tolerance");
  state.norm_deficit += std::max(0.0, before - after);
}

void ExactEngine::apply_cpb_drive(SectorState& state, const CpbDrive& drive) {
  // rotation exp(-i angle/2 n.sigma) on the CPB two-level system, with
  // n = (cos(phase) sqrt(1 - z^2), sin(phase) sqrt(1 - z^2), z)
  const double az = std::clamp(drive.axis_z, -1.0, 1.0);
  const double planar = std::sqrt(1.0 - az * az);
  const Eigen::Vector3d axis(std::cos(drive.axis_phase) * planar,
                             std::sin(drive.axis_phase) * planar, az);
  const double c = std::cos(0.5 * drive.angle);
  const std::complex<double> is(0.0, std::sin(0.5 * drive.angle));
  // basis (ground, excited); sigma_z = diag(1, -1) on it
  Eigen::Matrix2cd u;
  u(0, 0) = c - is * axis.z();
  u(1, 1) = c + is * axis.z();
  u(0, 1) = -is * (axis.x() - std::complex<double>(0, 1) * axis.y());
  u(1, 0) = -is * (axis.x() + std::complex<double>(0, 1) * axis.y());

  auto rotate_pair = [&](std::size_t lo, std::size_t hi) {
    const auto a = static_cast<Eigen::Index>(lo);
    const auto b = static_cast<Eigen::Index>(hi);
    const std::complex<double> xg = state.amplitudes[a];
    const std::complex<double> xe = state.amplitudes[b];
    state.amplitudes[a] = u(0, 0) * xg + u(0, 1) * xe;
    state.amplitudes[b] = u(1, 0) * xg + u(1, 1) * xe;
  };

  rotate_pair(basis_.vacuum(), basis_.cpb());
  if (basis_.max_excitations() >= 2) {
    rotate_pair(basis_.cavity(), basis_.cav_cpb());
    for (std::size_t q = 0; q < geometry_.n_spins(); ++q)
      rotate_pair(basis_.spin(q), basis_.cpb_spin(q));
    // raising out of the top sector is not representable; flag if populated
    double top = std::norm(state.amplitudes[static_cast<Eigen::Index>(basis_.cav_cav())]);
    if (std::abs(u(1, 0)) > 1e-12 && top > 1e-18)
      throw SimulationError("CPB drive would leave the bounded-excitation sector");
  } else if (std::abs(u(1, 0)) > 1e-12) {
    const double upper =
        state.norm_squared() - std::norm(state.amplitudes[static_cast<Eigen::Index>(basis_.vacuum())]) -
        std::norm(state.amplitudes[static_cast<Eigen::Index>(basis_.cpb())]);
    if (upper > 1e-18)
      throw SimulationError("CPB drive on an occupied single-excitation sector needs max_excitations = 2");
  }
}

void ExactEngine::apply_echo_pulse(SectorState& state, const EchoPulse& pulse) {
  if (pulse.error != 0.0)
    throw SimulationError(
        "imperfect echo pulses leave the bounded-excitation sector; "
        "use the classical error model");
  // A perfect pi pulse inverts the ensemble. Between the two pulses of a
  // pair the engine stores the conjugated state: detunings flip sign and
  // the cavity/CPB exchange is gated off (both are protected during echo
  // pulses). Closing a pair restores the lab frame, leaving a relative
  // phase exp(-2 i (phase_2 - phase_1)) on each spin excitation.
  if (echo_sign_ > 0) {
    open_echo_phase_ = pulse.phase;
    echo_sign_ = -1;
    return;
  }
  echo_sign_ = 1;
  const double dphi = pulse.phase - open_echo_phase_;
  if (dphi != 0.0) {
    const std::complex<double> once = std::polar(1.0, -2.0 * dphi);
    for (std::size_t q = 0; q < geometry_.n_spins(); ++q) {
      state.amplitudes[static_cast<Eigen::Index>(basis_.spin(q))] *= once;
      if (basis_.max_excitations() >= 2) {
        state.amplitudes[static_cast<Eigen::Index>(basis_.cav_spin(q))] *= once;
        state.amplitudes[static_cast<Eigen::Index>(basis_.cpb_spin(q))] *= once;
        for (std::size_t r = q + 1; r < geometry_.n_spins(); ++r)
          state.amplitudes[static_cast<Eigen::Index>(basis_.spin_pair(q, r))] *= once * once;
      }
    }
  }
}

void ExactEngine::evolve(SectorState& state, const Segment& segment) {
  if (const auto* grad = std::get_if<GradientPulse>(&segment)) {
    if (grad->duration <= 0.0) {
      if (grad->delta_k != 0.0)
        throw SimulationError("gradient pulse needs a positive duration");
      return;
    }
    SegmentParams p = idle_params(grad->duration);
    p.gradient_rate = -grad->delta_k / grad->duration;
    evolve_params(state, p);
  } else if (const auto* win = std::get_if<ResonanceWindow>(&segment)) {
    if (win->profile == WindowProfile::Square) {
      SegmentParams p = idle_params(win->duration);
      p.spin_detuning = 0.0;
      evolve_params(state, p);
    } else {
      // staircase approximation of a linear ramp in, hold, ramp out
      const double ramp_t = win->ramp_fraction * win->duration;
      const int steps = std::max(1, win->ramp_steps);
      for (int s = 0; s < steps; ++s) {
        SegmentParams p = idle_params(ramp_t / steps);
        p.spin_detuning = options_.idle_detuning * (1.0 - (s + 0.5) / steps);
        evolve_params(state, p);
      }
      SegmentParams hold = idle_params(win->duration - 2.0 * ramp_t);
      hold.spin_detuning = 0.0;
      evolve_params(state, hold);
      for (int s = 0; s < steps; ++s) {
        SegmentParams p = idle_params(ramp_t / steps);
        p.spin_detuning = options_.idle_detuning * ((s + 0.5) / steps);
        evolve_params(state, p);
      }
    }
  } else if (const auto* cw = std::get_if<CpbWindow>(&segment)) {
    SegmentParams p = idle_params(cw->duration);
    p.cpb_detuning = cw->detuning;
    evolve_params(state, p);
  } else if (const auto* drive = std::get_if<CpbDrive>(&segment)) {
    apply_cpb_drive(state, *drive);
  } else if (const auto* echo = std::get_if<EchoPulse>(&segment)) {
    apply_echo_pulse(state, *echo);
  } else if (const auto* wait = std::get_if<Wait>(&segment)) {
    evolve_params(state, idle_params(wait->duration));
  }
}

void ExactEngine::evolve(SectorState& state, const PulseSchedule& schedule) {
  schedule.validate();
  // hardware limit check: every gradient segment must be realizable
  for (const auto& segment : schedule.segments) {
    if (const auto* grad = std::get_if<GradientPulse>(&segment)) {
      if (grad->duration > 0.0) {
        const auto params = gradient_pulse_params(constants_, geometry_.length(),
                                                  grad->delta_k, grad->duration);
        if (std::abs(params.delta_B) > schedule.max_field_difference)
          throw SimulationError("gradient pulse exceeds the hardware field limit");
      }
    }
  }
  for (const auto& segment : schedule.segments) evolve(state, segment);
}

Eigen::VectorXcd ExactEngine::apply_lowering(const SectorState& state, double wavenumber) const {
  const ModeVector mode = ModeVector::at(geometry_, wavenumber);
  const auto n = geometry_.n_spins();
  // image lives one sector down; enumerate it over the <=1-excitation indices
  Eigen::VectorXcd image = Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(n + 3));
  const auto& x = state.amplitudes;
  for (std::size_t q = 0; q < n; ++q) {
    const auto cq = std::conj(mode.coefficients[static_cast<Eigen::Index>(q)]);
    image[0] += cq * x[static_cast<Eigen::Index>(basis_.spin(q))];
    if (basis_.max_excitations() >= 2) {
      image[1] += cq * x[static_cast<Eigen::Index>(basis_.cav_spin(q))];
      image[2] += cq * x[static_cast<Eigen::Index>(basis_.cpb_spin(q))];
      for (std::size_t r = 0; r < n; ++r) {
        if (r == q) continue;
        const auto pair = r < q ? basis_.spin_pair(r, q) : basis_.spin_pair(q, r);
        image[static_cast<Eigen::Index>(3 + r)] += cq * x[static_cast<Eigen::Index>(pair)];
      }
    }
  }
  return image;
}

double ExactEngine::mode_occupation(const SectorState& state, double wavenumber) const {
  if (echo_sign_ < 0)
    throw SimulationError("mode occupations are only physical at even echo parity");
  return apply_lowering(state, wavenumber).squaredNorm();
}

double ExactEngine::cavity_population(const SectorState& state) const {
  const auto& x = state.amplitudes;
  double pop = std::norm(x[static_cast<Eigen::Index>(basis_.cavity())]);
  if (basis_.max_excitations() >= 2) {
    pop += 2.0 * std::norm(x[static_cast<Eigen::Index>(basis_.cav_cav())]);
    pop += std::norm(x[static_cast<Eigen::Index>(basis_.cav_cpb())]);
    for (std::size_t q = 0; q < geometry_.n_spins(); ++q)
      pop += std::norm(x[static_cast<Eigen::Index>(basis_.cav_spin(q))]);
  }
  return pop;
}

double ExactEngine::cpb_population(const SectorState& state) const {
  const auto& x = state.amplitudes;
  double pop = std::norm(x[static_cast<Eigen::Index>(basis_.cpb())]);
  if (basis_.max_excitations() >= 2) {
    pop += std::norm(x[static_cast<Eigen::Index>(basis_.cav_cpb())]);
    for (std::size_t q = 0; q < geometry_.n_spins(); ++q)
      pop += std::norm(x[static_cast<Eigen::Index>(basis_.cpb_spin(q))]);
  }
  return pop;
}

std::complex<double> ExactEngine::overlap(const SectorState& a, const SectorState& b) const {
  return a.amplitudes.dot(b.amplitudes);
}

double ExactEngine::expected_energy(const SectorState& state, const Segment& segment) const {
  SegmentParams p;
  if (const auto* grad = std::get_if<GradientPulse>(&segment)) {
    p = idle_params(grad->duration);
    if (grad->duration > 0) p.gradient_rate = -grad->delta_k / grad->duration;
  } else if (std::get_if<ResonanceWindow>(&segment)) {
    p = idle_params(0.0);
    p.spin_detuning = 0.0;
  } else if (const auto* cw = std::get_if<CpbWindow>(&segment)) {
    p = idle_params(0.0);
    p.cpb_detuning = cw->detuning;
  } else {
    p = idle_params(0.0);
  }
  Eigen::VectorXcd hx(state.amplitudes.size());
  apply_hamiltonian(p, state.amplitudes, hx);
  return state.amplitudes.dot(hx).real();
}

}  // namespace holoreg
