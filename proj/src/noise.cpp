#include "holoreg/noise.hpp"

#include <cmath>

#include "holoreg/classical.hpp"
#include "holoreg/errors.hpp"

namespace holoreg {

void NoiseConfig::validate() const {
  if (temperature < 0 || thermal_p < 0 || sigma_inhomogeneity < 0 || dipolar_rate < 0)
    throw ConfigError("noise rates must be non-negative");
  if (std::abs(eps1) >= 0.5 || std::abs(eps2) >= 0.5)
    throw ConfigError("echo pulse errors must satisfy |eps| < 0.5");
  if (thermal_p >= 1.0) throw ConfigError("thermal occupation must be below 1");
  if (shots <= 0) throw ConfigError("shot count must be positive");
}

ThermalRegisterState thermal_register_state(const RegisterEngine& engine, double p) {
  if (p >= 1.0) throw ConfigError("thermal occupation must be below 1");
  if (p < 0.0) throw ConfigError("thermal occupation must be non-negative");
  return engine.thermal_product_state(std::vector<double>(engine.n_modes(), p));
}

std::vector<double> draw_inhomogeneity(std::size_t n, double sigma, std::mt19937_64& rng) {
  std::normal_distribution<double> dist(0.0, sigma);
  std::vector<double> out(n);
  for (auto& d : out) d = dist(rng);
  return out;
}

std::complex<double> finite_polarization_commutator(const EnsembleGeometry& geometry,
                                                    const std::vector<bool>& excited,
                                                    double k_i, double k_j) {
  if (excited.size() != geometry.n_spins())
    throw ConfigError("excited-set size must match the spin count");
  const double norm = static_cast<double>(geometry.n_spins()) * geometry.g_bar() * geometry.g_bar();
  std::complex<double> sum = 0.0;
  for (std::size_t q = 0; q < geometry.n_spins(); ++q) {
    const double sign = excited[q] ? -1.0 : 1.0;
    sum += sign * std::norm(geometry.couplings()[q]) *
           std::polar(1.0, (k_j - k_i) * geometry.positions()[q]);
  }
  return sum / norm;
}

EchoInjectionResult echo_error_injection(const EnsembleGeometry& geometry,
                                         const RegisterLayout& layout, double eps1, double eps2,
                                         const std::vector<double>& detunings, double interval,
                                         const std::vector<double>& drive_profile) {
  std::vector<double> profile = drive_profile;
  if (profile.empty()) {
    profile.resize(geometry.n_spins());
    for (std::size_t q = 0; q < geometry.n_spins(); ++q)
      profile[q] = std::abs(geometry.couplings()[q]) / geometry.g_bar();
  }

  ClassicalSpinWave wave(geometry);
  wave.echo_pulse(eps2, 0.0, profile);
  wave.precess(interval, detunings);
  wave.echo_pulse(eps1, 0.0, profile);

  const Eigen::VectorXcd dipoles = wave.dipole_amplitudes();

  EchoInjectionResult result;
  result.total_excitation = wave.total_excitation();
  result.k0_gain = std::norm(wave.mode_amplitude(0.0));

  // inhomogeneous mode: g-weighted coefficients with the phases accumulated
  // over the pulse interval, normalized before projecting
  Eigen::VectorXcd inhom = ModeVector::at(geometry, 0.0).coefficients;
  for (std::size_t q = 0; q < geometry.n_spins(); ++q)
    inhom[static_cast<Eigen::Index>(q)] *=
        std::polar(1.0, -(detunings.empty() ? 0.0 : detunings[q]) * interval);
  inhom.normalize();
  result.inhomogeneous_gain = std::norm(inhom.dot(dipoles));

  result.register_gains.reserve(layout.size());
  for (std::size_t i = 0; i < layout.size(); ++i)
    result.register_gains.push_back(wave.mode_occupation(layout.wavenumber(i)));
  return result;
}

void dephase_mode_density(Eigen::MatrixXcd& rho, double gamma, double duration) {
  if (gamma < 0) throw ConfigError("dephasing rate must be non-negative");
  for (Eigen::Index n = 0; n < rho.rows(); ++n)
    for (Eigen::Index m = 0; m < rho.cols(); ++m) {
      const double d = static_cast<double>(n - m);
      rho(n, m) *= std::exp(-gamma * duration * d * d);
    }
}

void dephasing_kicks(const ExactEngine& engine, SectorState& state, double gamma,
                     double duration, std::mt19937_64& rng) {
  if (gamma <= 0 || duration <= 0) return;
  const auto& basis = engine.basis();
  std::normal_distribution<double> kick(0.0, std::sqrt(2.0 * gamma * duration));
  const auto n = basis.n_spins();
  std::vector<double> phases(n);
  for (auto& p : phases) p = kick(rng);
  for (std::size_t q = 0; q < n; ++q) {
    const auto once = std::polar(1.0, -phases[q]);
    state.amplitudes[static_cast<Eigen::Index>(basis.spin(q))] *= once;
    if (basis.max_excitations() >= 2) {
      state.amplitudes[static_cast<Eigen::Index>(basis.cav_spin(q))] *= once;
      state.amplitudes[static_cast<Eigen::Index>(basis.cpb_spin(q))] *= once;
      for (std::size_t r = q + 1; r < n; ++r)
        state.amplitudes[static_cast<Eigen::Index>(basis.spin_pair(q, r))] *=
            once * std::polar(1.0, -phases[r]);
    }
  }
}

double dephasing_half_life(double gamma) {
  if (gamma <= 0) throw ConfigError("dephasing rate must be positive");
  return std::numbers::ln2 / gamma;
}

ScalingFit fit_loglog(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2)
    throw ConfigError("scaling fit needs at least two points");
  const auto n = static_cast<double>(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  std::vector<double> lx(x.size()), ly(y.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (x[i] <= 0 || y[i] <= 0) throw ConfigError("log-log fit needs positive data");
    lx[i] = std::log(x[i]);
    ly[i] = std::log(y[i]);
    sx += lx[i];
    sy += ly[i];
    sxx += lx[i] * lx[i];
    sxy += lx[i] * ly[i];
  }
  const double denom = sxx - sx * sx / n;
  if (denom <= 0) throw ConfigError("degenerate grid for scaling fit");
  ScalingFit fit;
  fit.slope = (sxy - sx * sy / n) / denom;
  fit.intercept = (sy - fit.slope * sx) / n;
  double ssr = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double r = ly[i] - fit.intercept - fit.slope * lx[i];
    ssr += r * r;
  }
  const double dof = std::max(1.0, n - 2.0);
  fit.slope_stderr = std::sqrt(ssr / dof / denom);
  return fit;
}

}  // namespace holoreg
