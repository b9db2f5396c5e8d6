#include "holoreg/classical.hpp"

#include <cmath>

#include "holoreg/errors.hpp"

namespace holoreg {

namespace {
constexpr std::complex<double> im(0.0, 1.0);
}

ClassicalSpinWave::ClassicalSpinWave(const EnsembleGeometry& geometry)
    : geometry_(&geometry),
      down_(geometry.n_spins(), 1.0),
      up_(geometry.n_spins(), 0.0) {}

void ClassicalSpinWave::pulse(double angle, double phase, const std::vector<double>& profile) {
  if (!profile.empty() && profile.size() != n_spins())
    throw ConfigError("pulse profile must cover every spin");
  const std::complex<double> eip = std::polar(1.0, phase);
  for (std::size_t q = 0; q < n_spins(); ++q) {
    const double theta = profile.empty() ? angle : angle * profile[q];
    const double c = std::cos(0.5 * theta);
    const double s = std::sin(0.5 * theta);
    const auto d = down_[q], u = up_[q];
    down_[q] = c * d - im * std::conj(eip) * s * u;
    up_[q] = -im * eip * s * d + c * u;
  }
}

void ClassicalSpinWave::echo_pulse(double error, double phase, const std::vector<double>& profile) {
  pulse(std::numbers::pi + 2.0 * error, phase, profile);
}

void ClassicalSpinWave::precess(double duration, const std::vector<double>& detunings) {
  if (!detunings.empty() && detunings.size() != n_spins())
    throw ConfigError("detuning table must cover every spin");
  for (std::size_t q = 0; q < n_spins(); ++q) {
    const double d = detunings.empty() ? 0.0 : detunings[q];
    up_[q] *= std::polar(1.0, -d * duration);
  }
}

void ClassicalSpinWave::gradient(double delta_k) {
  const auto& z = geometry_->positions();
  for (std::size_t q = 0; q < n_spins(); ++q)
    up_[q] *= std::polar(1.0, delta_k * z[q]);
}

Eigen::VectorXcd ClassicalSpinWave::dipole_amplitudes() const {
  Eigen::VectorXcd amps(static_cast<Eigen::Index>(n_spins()));
  for (std::size_t q = 0; q < n_spins(); ++q)
    amps[static_cast<Eigen::Index>(q)] = std::conj(down_[q]) * up_[q];
  return amps;
}

std::complex<double> ClassicalSpinWave::mode_amplitude(const ModeVector& mode) const {
  return mode.coefficients.dot(dipole_amplitudes());
}

std::complex<double> ClassicalSpinWave::mode_amplitude(double wavenumber) const {
  return mode_amplitude(ModeVector::at(*geometry_, wavenumber));
}

double ClassicalSpinWave::mode_occupation(double wavenumber) const {
  return std::norm(mode_amplitude(wavenumber));
}

double ClassicalSpinWave::total_excitation() const {
  double total = 0.0;
  for (const auto& u : up_) total += std::norm(u);
  return total;
}

}  // namespace holoreg
