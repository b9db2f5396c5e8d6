#include "holoreg/ensemble.hpp"

#include <cmath>
#include <random>

#include "holoreg/errors.hpp"

namespace holoreg {

namespace {

double rms_coupling(const std::vector<std::complex<double>>& couplings) {
  double sum = 0.0;
  for (const auto& g : couplings) sum += std::norm(g);
  return std::sqrt(sum / static_cast<double>(couplings.size()));
}

}  // namespace

EnsembleGeometry EnsembleGeometry::build(const EnsembleSpec& spec, std::uint64_t seed) {
  if (spec.profile == CouplingProfile::UserTable)
    return from_table(spec.user_positions, spec.user_couplings, spec.length);

  if (spec.n_spins == 0) throw ConfigError("ensemble needs at least one spin");
  if (spec.length <= 0) throw ConfigError("sample length must be positive");

  EnsembleGeometry geom;
  geom.length_ = spec.length;
  geom.positions_.resize(spec.n_spins);

  const auto n = spec.n_spins;
  if (spec.placement == Placement::Grid) {
    // midpoint grid: z_q = (q + 1/2) L / N
    for (std::size_t q = 0; q < n; ++q)
      geom.positions_[q] = (static_cast<double>(q) + 0.5) * spec.length / static_cast<double>(n);
  } else {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> dist(0.0, spec.length);
    for (std::size_t q = 0; q < n; ++q) geom.positions_[q] = dist(rng);
  }

  geom.couplings_.resize(n);
  switch (spec.profile) {
    case CouplingProfile::Uniform:
      for (std::size_t q = 0; q < n; ++q) geom.couplings_[q] = spec.coupling_scale;
      break;
    case CouplingProfile::CavityMode:
      // |g(z)| proportional to |sin(2 pi z / L)| for a full-wavelength cavity
      for (std::size_t q = 0; q < n; ++q)
        geom.couplings_[q] =
            spec.coupling_scale * std::abs(std::sin(two_pi * geom.positions_[q] / spec.length));
      break;
    default:
      throw ConfigError("unknown coupling profile");
  }

  geom.g_bar_ = rms_coupling(geom.couplings_);
  return geom;
}

EnsembleGeometry EnsembleGeometry::from_table(std::vector<double> positions,
                                              std::vector<std::complex<double>> couplings,
                                              double length) {
  if (positions.empty()) throw ConfigError("ensemble needs at least one spin");
  if (positions.size() != couplings.size())
    throw ConfigError("positions and couplings must have equal length");
  if (length <= 0) throw ConfigError("sample length must be positive");
  EnsembleGeometry geom;
  geom.positions_ = std::move(positions);
  geom.couplings_ = std::move(couplings);
  geom.length_ = length;
  geom.g_bar_ = rms_coupling(geom.couplings_);
  return geom;
}

double larmor_frequency(const PhysicalConstants& constants, double field) {
  if (field < 0) throw ConfigError("bias field must be non-negative");
  return constants.m0() * field / constants.hbar;
}

double collective_rabi(const EnsembleGeometry& geometry) {
  if (geometry.n_spins() == 0) throw ConfigError("empty ensemble");
  return collective_rabi(static_cast<double>(geometry.n_spins()), geometry.g_bar());
}

double collective_rabi(double n_spins, double g_bar) {
  if (n_spins < 1) throw ConfigError("empty ensemble");
  return std::sqrt(n_spins) * g_bar;
}

double thermal_probability(const PhysicalConstants& constants, double omega,
                           double temperature) {
  if (temperature <= 0) throw ConfigError("temperature must be positive");
  if (omega <= 0) throw ConfigError("transition frequency must be positive");
  const double x = std::exp(-constants.hbar * omega / (constants.k_B * temperature));
  return x / (1.0 + x);
}

}  // namespace holoreg
