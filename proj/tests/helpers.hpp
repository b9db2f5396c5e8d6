#pragma once

#include <cmath>
#include <complex>
#include <vector>

#include <Eigen/Dense>
#include <unsupported/Eigen/MatrixFunctions>

#include "holoreg/constants.hpp"
#include "holoreg/device.hpp"
#include "holoreg/ensemble.hpp"

namespace test_support {

using holoreg::two_pi;

inline holoreg::DeviceParams bench_device(double kappa = 0.0, double g_cpb = 0.0) {
  holoreg::DeviceParams device;
  device.omega_c = two_pi * 5e9;
  device.kappa = kappa;
  device.bias_field = 0.18;
  device.length = 0.0275;
  device.g_cpb = g_cpb;
  return device;
}

inline holoreg::EnsembleGeometry grid_geometry(std::size_t n, double coupling = two_pi * 20.0,
                                               double length = 0.0275) {
  holoreg::EnsembleSpec spec;
  spec.n_spins = n;
  spec.length = length;
  spec.profile = holoreg::CouplingProfile::Uniform;
  spec.placement = holoreg::Placement::Grid;
  spec.coupling_scale = coupling;
  return holoreg::EnsembleGeometry::build(spec, 0);
}

inline holoreg::EnsembleGeometry random_geometry(std::size_t n, std::uint64_t seed,
                                                 bool cavity_profile = false,
                                                 double coupling = two_pi * 20.0) {
  holoreg::EnsembleSpec spec;
  spec.n_spins = n;
  spec.length = 0.0275;
  spec.profile = cavity_profile ? holoreg::CouplingProfile::CavityMode
                                : holoreg::CouplingProfile::Uniform;
  spec.placement = holoreg::Placement::UniformRandom;
  spec.coupling_scale = coupling;
  return holoreg::EnsembleGeometry::build(spec, seed);
}

/// Independent quadrature oracle for the continuum mode overlap of the
/// |sin(2 pi z / L)| profile on z in [0, L]:
///   integral_0^L e^{i dk z} sin^2(2 pi z / L) dz / (L / 2)
/// evaluated with composite Simpson, never through the closed form.
inline std::complex<double> continuum_overlap_quadrature(double delta_w, int panels = 20000) {
  const double length = 1.0;  // scale-invariant in winding units
  const double dk = two_pi * delta_w / length;
  const double h = length / panels;
  auto f = [&](double z) {
    const double s = std::sin(two_pi * z / length);
    return std::polar(1.0, dk * z) * (s * s);
  };
  std::complex<double> sum = f(0.0) + f(length);
  for (int j = 1; j < panels; ++j) sum += (j % 2 ? 4.0 : 2.0) * f(j * h);
  return sum * (h / 3.0) / (length / 2.0);
}

/// Analytic resonant two-oscillator exchange in the one-excitation sector:
/// starting from |1 photon>, the photon amplitude is cos(Omega t).
inline double two_oscillator_photon_amplitude(double omega, double t) {
  return std::cos(omega * t);
}

/// Bosonic two-oscillator model restricted to the two-excitation sector,
/// basis {|2,0>, |1,1>, |0,2>} (photons, bosonic mode), exchange rate omega.
/// Returns occupation probabilities after time t starting from |2,0>.
inline Eigen::Vector3d bosonic_two_excitation_probs(double omega, double t) {
  Eigen::Matrix3cd h = Eigen::Matrix3cd::Zero();
  const double c = std::numbers::sqrt2 * omega;
  h(0, 1) = c;
  h(1, 0) = c;
  h(1, 2) = c;
  h(2, 1) = c;
  const Eigen::Matrix3cd u =
      (std::complex<double>(0.0, -t) * h).exp();
  Eigen::Vector3d probs;
  for (int i = 0; i < 3; ++i) probs[i] = std::norm(u(i, 0));
  return probs;
}

}  // namespace test_support
