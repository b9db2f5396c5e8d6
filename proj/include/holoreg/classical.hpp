#pragma once

#include <complex>
#include <vector>

#include <Eigen/Dense>

#include "holoreg/ensemble.hpp"
#include "holoreg/modes.hpp"

namespace holoreg {

/// Coherent (product-state) spin dynamics: one two-component spinor per
/// spin, composed exactly under rotations, free precession and gradient
/// pulses. This is the linear-response / classical-spin-wave picture; no
/// inter-spin entanglement.
class ClassicalSpinWave {
 public:
  explicit ClassicalSpinWave(const EnsembleGeometry& geometry);

  std::size_t n_spins() const { return down_.size(); }
  const EnsembleGeometry& geometry() const { return *geometry_; }

  /// Rotation of spin q by angle * profile[q] about the axis
  /// (cos(phase), sin(phase), 0). An empty profile means uniform.
  void pulse(double angle, double phase, const std::vector<double>& profile = {});

  /// Small-angle excitation pulse; identical to pulse() but named for the
  /// magnetization-tilt reading.
  void tilt(double angle, double phase = 0.0) { pulse(angle, phase); }

  /// Refocusing pulse of nominal area pi: per-spin rotation angle
  /// (pi + 2 error) * profile[q]; a vacuum spin is left with excited
  /// amplitude sin(error).
  void echo_pulse(double error, double phase, const std::vector<double>& profile = {});

  /// Free precession: excited amplitudes pick up e^{-i detuning_q t}.
  void precess(double duration, const std::vector<double>& detunings);

  /// (k)-pulse: multiplies excited amplitudes by e^{i delta_k z_q}.
  void gradient(double delta_k);

  /// Transverse dipole amplitudes <sigma_minus> per spin.
  Eigen::VectorXcd dipole_amplitudes() const;

  /// Amplitude of the normalized mode vector: sum_q conj(c_q) <sigma_minus>_q.
  std::complex<double> mode_amplitude(const ModeVector& mode) const;
  std::complex<double> mode_amplitude(double wavenumber) const;
  double mode_occupation(double wavenumber) const;

  /// Total excited population sum_q |up_q|^2.
  double total_excitation() const;

 private:
  const EnsembleGeometry* geometry_;
  std::vector<std::complex<double>> down_, up_;
};

}  // namespace holoreg
