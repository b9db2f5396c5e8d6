#include <doctest.h>

#include <random>

#include <Eigen/Eigenvalues>

#include "holoreg/errors.hpp"
#include "holoreg/modes.hpp"
#include "helpers.hpp"

using namespace holoreg;
using test_support::grid_geometry;
using test_support::random_geometry;

TEST_CASE("mode vectors have unit norm for any geometry") {
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    const auto geom = random_geometry(500, seed, seed % 2 == 0);
    const auto mode = ModeVector::at(geom, two_pi * 5.0 / geom.length());
    CHECK(mode.coefficients.squaredNorm() == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("mode overlap basics") {
  const auto geom = random_geometry(2000, 5, true);
  CHECK(mode_overlap(geom, 0.0) == std::complex<double>(1.0, 0.0));

  // |M| <= 1 everywhere
  for (double dw : {0.3, 1.7, 4.2, 11.0})
    CHECK(std::abs(mode_overlap(geom, two_pi * dw / geom.length())) <= 1.0 + 1e-12);
}

TEST_CASE("Bravais lattice: reciprocal-lattice overlaps vanish exactly") {
  const auto geom = grid_geometry(64, 1.0);
  for (int w : {1, 2, 3, 5, 9, 31})
    CHECK(std::abs(mode_overlap(geom, two_pi * w / geom.length())) < 1e-12);
}

TEST_CASE("aliasing on a Bravais lattice: dw = N multiples have |M| = 1") {
  const auto geom = grid_geometry(32, 1.0);
  for (int mult : {1, 2, 3})
    CHECK(std::abs(mode_overlap(geom, two_pi * 32 * mult / geom.length())) ==
          doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("random doping: overlap magnitude is of order 1/sqrt(N)") {
  const std::size_t n = 10000;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const auto geom = random_geometry(n, seed);
    const auto m = mode_overlap(geom, two_pi / geom.length());
    CHECK(std::abs(m) < 5.0 / std::sqrt(static_cast<double>(n)));
  }
}

TEST_CASE("overlap conjugate symmetry M(-dk) = conj(M(dk))") {
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> dws(-8.0, 8.0);
  for (int i = 0; i < 50; ++i) {
    const auto geom = random_geometry(200, rng(), i % 2 == 0);
    const double dk = two_pi * dws(rng) / geom.length();
    const auto plus = mode_overlap(geom, dk);
    const auto minus = mode_overlap(geom, -dk);
    CHECK(std::abs(minus - std::conj(plus)) < 1e-12);
  }
}

TEST_CASE("continuum overlap closed form") {
  CHECK(continuum_overlap(0.0) == doctest::Approx(1.0));
  for (int w : {1, 3, 4, 5, 6, 7, 10}) {
    CHECK(std::abs(continuum_overlap(w)) < 1e-12);
    CHECK(std::abs(continuum_overlap(-w)) < 1e-12);
  }

  SUBCASE("dw = 2 removable singularity equals -1/2") {
    // numerical limits of the closed form approaching from both sides
    CHECK(continuum_overlap(2.0 + 1e-6) == doctest::Approx(-0.5).epsilon(1e-5));
    CHECK(continuum_overlap(2.0 - 1e-6) == doctest::Approx(-0.5).epsilon(1e-5));
    CHECK(continuum_overlap(2.0) == doctest::Approx(-0.5).epsilon(1e-9));
    CHECK(continuum_overlap(-2.0) == doctest::Approx(-0.5).epsilon(1e-9));
  }

  SUBCASE("independent quadrature oracle over quarter-integer dw") {
    for (double dw = -10.0; dw <= 10.0 + 1e-9; dw += 0.25) {
      const auto oracle = test_support::continuum_overlap_quadrature(dw);
      const auto phased = continuum_overlap_phased(dw);
      CHECK(std::abs(oracle - phased) < 1e-9);
    }
  }
}

TEST_CASE("discrete sum converges to the continuum form (phased by the origin)") {
  // 1e5 gridded spins with the cavity-mode profile; tolerance scales as 1/N
  const std::size_t n = 100000;
  holoreg::EnsembleSpec spec;
  spec.n_spins = n;
  spec.length = 0.0275;
  spec.profile = CouplingProfile::CavityMode;
  spec.placement = Placement::Grid;
  const auto geom = EnsembleGeometry::build(spec, 0);
  for (double dw = -10.0; dw <= 10.0 + 1e-9; dw += 1.25) {
    const auto discrete = mode_overlap(geom, two_pi * dw / geom.length());
    CHECK(std::abs(discrete - continuum_overlap_phased(dw)) < 1e-3);
  }
}

TEST_CASE("register mode selection") {
  SUBCASE("stride3 windings") {
    const auto layout = select_register_modes(5, ModeScheme::Stride3, 1.0);
    CHECK(layout.windings == std::vector<int>{0, 3, 6, 9, 12});
  }
  SUBCASE("dense windings") {
    const auto layout = select_register_modes(5, ModeScheme::Dense, 1.0);
    CHECK(layout.windings == std::vector<int>{0, 3, 4, 7, 8});
    const auto more = select_register_modes(7, ModeScheme::Dense, 1.0);
    CHECK(more.windings == std::vector<int>{0, 3, 4, 7, 8, 11, 12});
  }
  SUBCASE("single mode") {
    for (auto scheme : {ModeScheme::Stride3, ModeScheme::Dense}) {
      const auto layout = select_register_modes(1, scheme, 1.0);
      CHECK(layout.windings == std::vector<int>{0});
      CHECK(layout.gram(0, 0) == std::complex<double>(1.0, 0.0));
    }
  }
  SUBCASE("continuum gram is the identity to 1e-12") {
    for (auto scheme : {ModeScheme::Stride3, ModeScheme::Dense}) {
      const auto layout = select_register_modes(8, scheme, 1.0);
      CHECK(layout.max_off_diagonal() < 1e-12);
      layout.validate();
    }
  }
  SUBCASE("count of zero is rejected") {
    CHECK_THROWS_AS(select_register_modes(0, ModeScheme::Stride3, 1.0), ConfigError);
  }
  SUBCASE("winding numbers that alias on a small discrete geometry are rejected") {
    CHECK_THROWS_AS(select_register_modes(5, ModeScheme::Stride3, 1.0, 16), ConfigError);
    CHECK_NOTHROW(select_register_modes(5, ModeScheme::Stride3, 1.0, 64));
  }
}

TEST_CASE("gram matrix") {
  SUBCASE("single mode") {
    const auto geom = random_geometry(100, 3);
    const auto gram = gram_matrix(geom, {0.0});
    REQUIRE(gram.rows() == 1);
    CHECK(gram(0, 0) == std::complex<double>(1.0, 0.0));
  }

  SUBCASE("Bravais lattice with a reciprocal register set gives the identity") {
    const auto geom = grid_geometry(64, 1.0);
    std::vector<double> ks;
    for (int w : {0, 3, 6, 9}) ks.push_back(two_pi * w / geom.length());
    const auto gram = gram_matrix(geom, ks);
    for (Eigen::Index i = 0; i < gram.rows(); ++i)
      for (Eigen::Index j = 0; j < gram.cols(); ++j)
        CHECK(std::abs(gram(i, j) - (i == j ? 1.0 : 0.0)) < 1e-12);
  }

  SUBCASE("off-diagonals shrink as 1/sqrt(N) for the cavity profile") {
    double prev = 1.0;
    for (std::size_t n : {1000u, 10000u, 100000u}) {
      const auto geom = random_geometry(n, 17, true);
      std::vector<double> ks;
      for (int w : {0, 3, 6}) ks.push_back(two_pi * w / geom.length());
      const auto gram = gram_matrix(geom, ks);
      double worst = 0.0;
      for (Eigen::Index i = 0; i < gram.rows(); ++i)
        for (Eigen::Index j = 0; j < gram.cols(); ++j)
          if (i != j) worst = std::max(worst, std::abs(gram(i, j)));
      CHECK(worst < 5.0 / std::sqrt(static_cast<double>(n)));
      CHECK(worst < prev);
      prev = worst;
    }
  }

  SUBCASE("discrete layout gram is positive semidefinite") {
    for (std::uint64_t seed : {1u, 5u, 9u}) {
      const auto geom = random_geometry(3000, seed, true);
      const auto layout = discrete_layout(geom, {0, 3, 4, 7, 8}, 1.0);
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> eig(layout.gram);
      CHECK(eig.eigenvalues().minCoeff() > -1e-9);
    }
  }
}

TEST_CASE("gradient pulse parameters") {
  PhysicalConstants c;

  SUBCASE("zero wavenumber needs no field") {
    const auto p = gradient_pulse_params(c, 0.0275, 0.0, 1e-7);
    CHECK(p.delta_B == 0.0);
  }

  SUBCASE("2 pi / L in 100 ns takes about 0.357 mT across the sample") {
    // scalar oracle: |dB| = 2 pi hbar / (m0 tau), evaluated independently
    const double tau = 100e-9;
    const double oracle = two_pi * c.hbar / (c.m0() * tau);
    const double length = 0.0275;
    const auto p = gradient_pulse_params(c, length, two_pi / length, tau);
    CHECK(std::abs(p.delta_B) == doctest::Approx(oracle).epsilon(1e-12));
    CHECK(std::abs(p.delta_B) == doctest::Approx(0.357e-3).epsilon(0.01));
  }

  SUBCASE("with L = 2.75 cm the gradient is about 13 mT/m") {
    const double length = 0.0275;
    const auto p = gradient_pulse_params(c, length, two_pi / length, 100e-9);
    CHECK(std::abs(p.gradient) == doctest::Approx(13e-3).epsilon(0.15));
  }

  SUBCASE("sign: a positive target k needs a negative field difference") {
    const auto p = gradient_pulse_params(c, 1.0, 5.0, 1e-6);
    CHECK(p.delta_B < 0.0);
  }

  SUBCASE("zero duration is rejected") {
    CHECK_THROWS_AS(gradient_pulse_params(c, 1.0, 1.0, 0.0), ConfigError);
  }
}

TEST_CASE("layout validation enforces the crosstalk budget") {
  const auto geom = random_geometry(100, 2);
  auto layout = discrete_layout(geom, {0, 3, 6}, 1e-4);
  CHECK_THROWS_AS(layout.validate(), ConfigError);  // 1/sqrt(100) = 0.1 >> 1e-4
  layout.crosstalk_budget = 1.0;
  CHECK_NOTHROW(layout.validate());
}
