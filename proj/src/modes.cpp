#include "holoreg/modes.hpp"

#include <cmath>

#include "holoreg/errors.hpp"

namespace holoreg {

ModeVector ModeVector::at(const EnsembleGeometry& geometry, double wavenumber) {
  const auto n = geometry.n_spins();
  ModeVector mode;
  mode.wavenumber = wavenumber;
  mode.coefficients.resize(static_cast<Eigen::Index>(n));
  const double root_n = std::sqrt(static_cast<double>(n));
  const double g_bar = geometry.g_bar();
  for (std::size_t q = 0; q < n; ++q) {
    const double phase = wavenumber * geometry.positions()[q];
    mode.coefficients[static_cast<Eigen::Index>(q)] =
        geometry.couplings()[q] / g_bar * std::polar(1.0, phase) / root_n;
  }
  return mode;
}

std::complex<double> mode_overlap(const EnsembleGeometry& geometry, double delta_k) {
  const auto n = geometry.n_spins();
  const double norm = static_cast<double>(n) * geometry.g_bar() * geometry.g_bar();
  std::complex<double> sum = 0.0;
  for (std::size_t q = 0; q < n; ++q)
    sum += std::norm(geometry.couplings()[q]) * std::polar(1.0, delta_k * geometry.positions()[q]);
  return sum / norm;
}

double continuum_overlap(double delta_w) {
  const double denom = 1.0 - 0.25 * delta_w * delta_w;
  if (std::abs(denom) < 1e-9) {
    // removable singularity at dw = +-2
    return -0.5;
  }
  const double x = std::numbers::pi * delta_w;
  const double sinc = std::abs(x) < 1e-12 ? 1.0 : std::sin(x) / x;
  return sinc / denom;
}

std::complex<double> continuum_overlap_phased(double delta_w) {
  return std::polar(1.0, std::numbers::pi * delta_w) * continuum_overlap(delta_w);
}

double RegisterLayout::max_off_diagonal() const {
  double worst = 0.0;
  for (Eigen::Index i = 0; i < gram.rows(); ++i)
    for (Eigen::Index j = 0; j < gram.cols(); ++j)
      if (i != j) worst = std::max(worst, std::abs(gram(i, j)));
  return worst;
}

void RegisterLayout::validate() const {
  if (windings.empty()) throw ConfigError("register layout has no modes");
  if (gram.rows() != static_cast<Eigen::Index>(windings.size()) || gram.rows() != gram.cols())
    throw ConfigError("gram matrix dimension mismatch");
  for (Eigen::Index i = 0; i < gram.rows(); ++i) {
    if (std::abs(gram(i, i) - 1.0) > 1e-9)
      throw ConfigError("gram diagonal must be 1");
    for (Eigen::Index j = 0; j < i; ++j)
      if (std::abs(gram(i, j) - std::conj(gram(j, i))) > 1e-9)
        throw ConfigError("gram matrix must be Hermitian");
  }
  if (max_off_diagonal() > crosstalk_budget)
    throw ConfigError("register layout exceeds its crosstalk budget");
}

RegisterLayout select_register_modes(std::size_t count, ModeScheme scheme, double length,
                                     std::optional<std::size_t> n_spins,
                                     double crosstalk_budget) {
  if (count == 0) throw ConfigError("register needs at least one mode");
  if (length <= 0) throw ConfigError("sample length must be positive");

  RegisterLayout layout;
  layout.length = length;
  layout.crosstalk_budget = crosstalk_budget;
  layout.windings.reserve(count);
  if (scheme == ModeScheme::Stride3) {
    for (std::size_t i = 0; i < count; ++i)
      layout.windings.push_back(3 * static_cast<int>(i));
  } else {
    // 0, then pairs (4m - 1, 4m): consecutive gaps of 3 and 1, so no two
    // members differ by 0 or +-2
    layout.windings.push_back(0);
    for (int m = 1; layout.windings.size() < count; ++m) {
      layout.windings.push_back(4 * m - 1);
      if (layout.windings.size() < count) layout.windings.push_back(4 * m);
    }
  }

  if (n_spins) {
    const double limit = static_cast<double>(*n_spins) / 2.0;
    for (int w : layout.windings)
      if (std::abs(w) >= limit)
        throw ConfigError("winding number " + std::to_string(w) +
                          " aliases on a discrete geometry of " + std::to_string(*n_spins) +
                          " spins");
  }

  const auto m = static_cast<Eigen::Index>(count);
  layout.gram.resize(m, m);
  for (Eigen::Index i = 0; i < m; ++i)
    for (Eigen::Index j = 0; j < m; ++j)
      layout.gram(i, j) = continuum_overlap(
          static_cast<double>(layout.windings[static_cast<std::size_t>(j)] -
                              layout.windings[static_cast<std::size_t>(i)]));
  return layout;
}

Eigen::MatrixXcd gram_matrix(const EnsembleGeometry& geometry,
                             const std::vector<double>& wavenumbers) {
  if (wavenumbers.empty()) throw ConfigError("gram_matrix needs at least one wavenumber");
  const auto m = static_cast<Eigen::Index>(wavenumbers.size());
  Eigen::MatrixXcd gram(m, m);
  for (Eigen::Index i = 0; i < m; ++i) {
    gram(i, i) = 1.0;
    for (Eigen::Index j = i + 1; j < m; ++j) {
      const auto entry = mode_overlap(
          geometry, wavenumbers[static_cast<std::size_t>(j)] - wavenumbers[static_cast<std::size_t>(i)]);
      gram(i, j) = entry;
      gram(j, i) = std::conj(entry);
    }
  }
  return gram;
}

RegisterLayout discrete_layout(const EnsembleGeometry& geometry, std::vector<int> windings,
                               double crosstalk_budget) {
  RegisterLayout layout;
  layout.length = geometry.length();
  layout.crosstalk_budget = crosstalk_budget;
  layout.windings = std::move(windings);
  std::vector<double> ks;
  ks.reserve(layout.windings.size());
  for (int w : layout.windings) ks.push_back(two_pi * w / layout.length);
  layout.gram = gram_matrix(geometry, ks);
  return layout;
}

GradientPulseParams gradient_pulse_params(const PhysicalConstants& constants, double length,
                                          double target_k, double tau) {
  if (tau <= 0) throw ConfigError("gradient pulse duration must be positive");
  if (length <= 0) throw ConfigError("sample length must be positive");
  GradientPulseParams params;
  params.delta_B = -target_k * length * constants.hbar / (constants.m0() * tau);
  params.gradient = params.delta_B / length;
  return params;
}

}  // namespace holoreg
