#include <doctest.h>

#include <random>

#include "holoreg/ensemble.hpp"
#include "holoreg/errors.hpp"
#include "helpers.hpp"

using namespace holoreg;
using test_support::grid_geometry;

TEST_CASE("constants: m0 is exactly g * mu_B and everything is positive") {
  PhysicalConstants c;
  CHECK(c.m0() == c.g_factor * c.mu_B);
  c.validate();
  c.g_factor = -1.0;
  CHECK_THROWS_AS(c.validate(), ConfigError);
}

TEST_CASE("larmor frequency") {
  PhysicalConstants c;
  CHECK(larmor_frequency(c, 0.0) == 0.0);

  // 180 mT bias field brings the spins to the 5 GHz cavity within 2%
  const double omega = larmor_frequency(c, 0.18);
  CHECK(omega == doctest::Approx(two_pi * 5e9).epsilon(0.02));

  CHECK(larmor_frequency(c, 0.09) == doctest::Approx(0.5 * omega).epsilon(1e-14));
  CHECK_THROWS_AS(larmor_frequency(c, -0.1), ConfigError);
}

TEST_CASE("larmor frequency is linear in the field") {
  PhysicalConstants c;
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> field(1e-6, 10.0);
  const double base = larmor_frequency(c, 1.0);
  for (int i = 0; i < 20; ++i) {
    const double b = field(rng);
    CHECK(larmor_frequency(c, b) == doctest::Approx(b * base).epsilon(1e-12));
  }
}

TEST_CASE("collective rabi enhancement") {
  // paper-scale arithmetic: N = 1e11 at g_bar = 2 pi x 20 Hz gives ~2 pi x 6.3 MHz
  CHECK(collective_rabi(1e11, two_pi * 20.0) ==
        doctest::Approx(two_pi * 6.3e6).epsilon(0.01));

  const auto single = grid_geometry(1, two_pi * 20.0);
  CHECK(collective_rabi(single) == doctest::Approx(two_pi * 20.0).epsilon(1e-12));

  const auto four = grid_geometry(4, 1.0);
  CHECK(collective_rabi(four) == doctest::Approx(2.0).epsilon(1e-12));

  CHECK_THROWS_AS(collective_rabi(0.0, 1.0), ConfigError);
}

TEST_CASE("collective rabi scales exactly as sqrt(N) for equal couplings") {
  const double g = two_pi * 20.0;
  for (std::size_t n : {1u, 4u, 9u, 16u, 25u, 36u}) {
    const auto geom = grid_geometry(n, g);
    CHECK(collective_rabi(geom) ==
          doctest::Approx(std::sqrt(static_cast<double>(n)) * g).epsilon(1e-12));
  }
}

TEST_CASE("build_ensemble") {
  SUBCASE("uniform grid matches the midpoint positions and g_bar = g") {
    const auto geom = grid_geometry(4, 3.0, 1.0);
    REQUIRE(geom.n_spins() == 4);
    CHECK(geom.positions()[0] == doctest::Approx(1.0 / 8));
    CHECK(geom.positions()[1] == doctest::Approx(3.0 / 8));
    CHECK(geom.positions()[2] == doctest::Approx(5.0 / 8));
    CHECK(geom.positions()[3] == doctest::Approx(7.0 / 8));
    CHECK(geom.g_bar() == doctest::Approx(3.0).epsilon(1e-12));
  }

  SUBCASE("g_bar is the root mean square of the couplings") {
    const auto geom = test_support::random_geometry(1000, 11, true);
    double sum = 0.0;
    for (const auto& g : geom.couplings()) sum += std::norm(g);
    CHECK(geom.g_bar() * geom.g_bar() ==
          doctest::Approx(sum / geom.n_spins()).epsilon(1e-12));
  }

  SUBCASE("deterministic for a fixed seed") {
    const auto a = test_support::random_geometry(256, 42, true);
    const auto b = test_support::random_geometry(256, 42, true);
    REQUIRE(a.n_spins() == b.n_spins());
    for (std::size_t q = 0; q < a.n_spins(); ++q) {
      CHECK(a.positions()[q] == b.positions()[q]);
      CHECK(a.couplings()[q] == b.couplings()[q]);
    }
  }

  SUBCASE("rejects empty ensembles") {
    EnsembleSpec spec;
    spec.n_spins = 0;
    spec.length = 1.0;
    CHECK_THROWS_AS(EnsembleGeometry::build(spec, 0), ConfigError);
  }
}

TEST_CASE("thermal probability") {
  PhysicalConstants c;
  const double omega = two_pi * 5e9;

  // infinite-temperature limit -> 1/2
  CHECK(thermal_probability(c, omega, 1e6) == doctest::Approx(0.5).epsilon(1e-4));

  // 20 mK: within a factor 2 of 1e-5
  const double p = thermal_probability(c, omega, 0.020);
  CHECK(p > 0.5e-5);
  CHECK(p < 2e-5);
  CHECK(p == doctest::Approx(6.1e-6).epsilon(0.05));

  // hbar omega / k_B T = ln 2 -> exactly 1/3
  const double t_ln2 = c.hbar * omega / (c.k_B * std::numbers::ln2);
  CHECK(thermal_probability(c, omega, t_ln2) == doctest::Approx(1.0 / 3.0).epsilon(1e-12));

  CHECK_THROWS_AS(thermal_probability(c, omega, 0.0), ConfigError);
  CHECK_THROWS_AS(thermal_probability(c, omega, -1.0), ConfigError);
}
