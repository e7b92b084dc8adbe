#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "decolab/emission.hpp"
#include "decolab/geometry.hpp"
#include "decolab/quadrature.hpp"
#include "decolab/rng.hpp"
#include "decolab/units.hpp"

using namespace decolab;

TEST_CASE("dipole marginal values and support") {
  CHECK(dipole_marginal(0.0) == 0.375);
  CHECK(dipole_marginal(1.0) == 0.75);
  CHECK(dipole_marginal(-1.0) == 0.75);
  CHECK(dipole_marginal(1.0000001) == 0.0);
  CHECK(dipole_marginal(-3.0) == 0.0);

  SplitMix64 rng(11);
  for (int i = 0; i < 200; ++i) {
    const double u = 2.0 * rng.uniform() - 1.0;
    CHECK(dipole_marginal(u) >= 0.375);                        // minimum at u = 0
    CHECK(dipole_marginal(u) == dipole_marginal(-u));          // mirror symmetric
  }
}

TEST_CASE("dipole marginal is normalized") {
  const auto dist = MomentumTransferDistribution::dipole();
  CHECK_THAT(dist.norm(), Catch::Matchers::WithinAbs(1.0, 1e-9));
}

TEST_CASE("dipole second moment is exactly 2/5") {
  // quadrature against the analytic moment of (3/8)(1+u^2)
  const auto dist = MomentumTransferDistribution::dipole();
  CHECK_THAT(dist.second_moment(), Catch::Matchers::WithinAbs(0.4, 1e-9));
  CHECK_THAT(sigma_k(), Catch::Matchers::WithinAbs(0.632455532033676, 1e-9));
}

TEST_CASE("isotropic marginal second moment is 1/3") {
  const auto dist = MomentumTransferDistribution::isotropic();
  CHECK_THAT(dist.norm(), Catch::Matchers::WithinAbs(1.0, 1e-9));
  CHECK_THAT(dist.second_moment(), Catch::Matchers::WithinAbs(1.0 / 3.0, 1e-9));
}

TEST_CASE("point-mass distribution has exact moments") {
  const auto still = MomentumTransferDistribution::delta_at(0.0);
  CHECK(sigma_k(still) == 0.0);
  const auto forward = MomentumTransferDistribution::delta_at(0.7);
  CHECK_THAT(sigma_k(forward), Catch::Matchers::WithinAbs(0.7, 1e-15));
  CHECK_THROWS_AS(MomentumTransferDistribution::delta_at(1.5), std::invalid_argument);
}

TEST_CASE("quadrature reproduces known integrals") {
  CHECK_THAT(integrate([](double x) { return x * x; }, 0.0, 1.0, 1e-12),
             Catch::Matchers::WithinAbs(1.0 / 3.0, 1e-11));
  CHECK_THAT(integrate([](double x) { return std::sin(x); }, 0.0, two_pi, 1e-12),
             Catch::Matchers::WithinAbs(0.0, 1e-11));
  // oscillatory complex integrand: int_0^1 e^{i a x} dx
  const double a = 40.0;
  const auto z = integrate(
      [a](double x) {
        return std::complex<double>(std::cos(a * x), std::sin(a * x));
      },
      0.0, 1.0, 1e-12);
  CHECK_THAT(z.real(), Catch::Matchers::WithinAbs(std::sin(a) / a, 1e-11));
  CHECK_THAT(z.imag(), Catch::Matchers::WithinAbs((1.0 - std::cos(a)) / a, 1e-11));
  CHECK(integrate([](double x) { return x; }, 2.0, 2.0) == 0.0);
  CHECK_THROWS_AS(integrate([](double x) { return x; }, 0.0, 1.0, 0.0),
                  std::invalid_argument);
}

TEST_CASE("unit conversions round-trip") {
  UnitsConvention units;  // 590 nm
  CHECK_THAT(units.k0_rad_per_m() * units.lambda_m(),
             Catch::Matchers::WithinRel(two_pi, 1e-15));
  CHECK_THAT(units.separation_to_si(1.0), Catch::Matchers::WithinRel(590e-9, 1e-15));

  SplitMix64 rng(7);
  for (int i = 0; i < 100; ++i) {
    const double d = 10.0 * rng.uniform();
    CHECK_THAT(units.separation_from_si(units.separation_to_si(d)),
               Catch::Matchers::WithinRel(d, 1e-12));
    const double k = 5.0 * rng.uniform();
    CHECK_THAT(units.momentum_from_si(units.momentum_to_si(k)),
               Catch::Matchers::WithinRel(k, 1e-12));
  }

  // phase of one recoil across one wavelength is exactly 2 pi
  CHECK(phase_k0_lambda(1.0, 1.0) == two_pi);
}

TEST_CASE("arm separation grows linearly and clamps") {
  InterferometerGeometry g;
  g.diffraction_angle_rad = 1e-5;
  g.grating1_z_m = 0.0;
  g.grating2_z_m = 0.66;
  g.max_separation_m = 1e-5 * 0.66;

  CHECK(separation_at_laser(g, 0.0) == 0.0);
  CHECK_THAT(separation_at_laser(g, 0.05), Catch::Matchers::WithinRel(0.5e-6, 1e-12));

  SECTION("monotone non-decreasing along the axis") {
    double prev = 0.0;
    for (int i = 0; i <= 100; ++i) {
      const double z = 0.66 * i / 100.0;
      const double d = separation_at_laser(g, z);
      CHECK(d >= prev);
      prev = d;
    }
  }

  SECTION("clamp engages at the configured maximum") {
    g.max_separation_m = 2e-6;
    CHECK(separation_at_laser(g, 0.5) == 2e-6);
  }

  SECTION("out-of-range laser positions are rejected") {
    CHECK_THROWS_AS(separation_at_laser(g, -0.01), std::domain_error);
    CHECK_THROWS_AS(separation_at_laser(g, 0.7), std::domain_error);
  }

  SECTION("invalid geometry is rejected") {
    g.diffraction_angle_rad = 0.0;
    CHECK_THROWS_AS(separation_at_laser(g, 0.1), std::invalid_argument);
  }
}
