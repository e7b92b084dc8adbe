#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <complex>

#include "decolab/composition.hpp"
#include "decolab/master_equation.hpp"

using namespace decolab;

namespace {

DensityMatrixGrid standard_two_peak() {
  return DensityMatrixGrid::two_peak(32, -1.0, 1.0, 0.8, 0.08);
}

}  // namespace

TEST_CASE("two-peak construction is a valid state") {
  const auto rho = standard_two_peak();
  REQUIRE(rho.size() == 32);
  CHECK_THAT(rho.trace_grid_weighted(), Catch::Matchers::WithinAbs(1.0, 1e-12));
  CHECK_NOTHROW(rho.validate(true));  // Hermitian + PSD

  CHECK_THROWS_AS(DensityMatrixGrid::two_peak(1, -1, 1, 0.5, 0.1),
                  std::invalid_argument);
  CHECK_THROWS_AS(DensityMatrixGrid::two_peak(16, 1, -1, 0.5, 0.1),
                  std::invalid_argument);
  CHECK_THROWS_AS(DensityMatrixGrid::two_peak(16, -1, 1, 0.5, 0.0),
                  std::invalid_argument);
}

TEST_CASE("validation catches corrupted states") {
  auto rho = standard_two_peak();
  rho.at(2, 5) += std::complex<double>(0.0, 0.3);  // breaks Hermiticity
  CHECK_THROWS_AS(rho.validate(false), std::invalid_argument);

  auto rho2 = standard_two_peak();
  // Hermitian but indefinite: flip the sign of one coherence pair hard
  rho2.at(3, 28) = -40.0 * rho2.at(3, 28);
  rho2.at(28, 3) = std::conj(rho2.at(3, 28));
  CHECK_THROWS_AS(rho2.validate(true), std::invalid_argument);

  auto rho3 = standard_two_peak();
  rho3.positions[4] += 0.01;  // non-uniform grid
  CHECK_THROWS_AS(rho3.validate(false), std::invalid_argument);
}

TEST_CASE("zero diffusion leaves the state untouched") {
  const auto rho = standard_two_peak();
  const auto out = evolve_pure_decoherence(rho, 0.0, 2.5);
  CHECK(out.values == rho.values);
  CHECK(out.positions == rho.positions);
}

TEST_CASE("off-diagonals decay by separation, diagonals never") {
  const auto rho = standard_two_peak();
  const double D = 1.3, t = 0.7;
  const auto out = evolve_pure_decoherence(rho, D, t);

  const std::size_t m = rho.size();
  for (std::size_t i = 0; i < m; ++i) {
    CHECK(out.at(i, i) == rho.at(i, i));
    for (std::size_t j = 0; j < m; ++j) {
      const double dx = rho.positions[i] - rho.positions[j];
      const double expected = std::exp(-D * D * dx * dx * t);
      if (std::abs(rho.at(i, j)) > 1e-14) {
        CHECK_THAT(std::abs(out.at(i, j)) / std::abs(rho.at(i, j)),
                   Catch::Matchers::WithinRel(expected, 1e-12));
      }
    }
  }
  CHECK_THAT(out.trace_grid_weighted(),
             Catch::Matchers::WithinRel(rho.trace_grid_weighted(), 1e-12));
  CHECK_NOTHROW(out.validate(true));  // Schur product with a Gaussian kernel keeps PSD
}

TEST_CASE("coherence loss is monotone in time and gaussian in separation") {
  const auto rho = standard_two_peak();
  const double D = 0.9;
  const auto early = evolve_pure_decoherence(rho, D, 0.4);
  const auto late = evolve_pure_decoherence(rho, D, 1.1);
  const std::size_t m = rho.size();
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < m; ++j)
      CHECK(std::abs(late.at(i, j)) <= std::abs(early.at(i, j)) + 1e-15);

  // log decay at separation d vs 2d differs by exactly 4
  const double l1 = std::log(std::abs(early.at(8, 12)) / std::abs(rho.at(8, 12)));
  const double l2 = std::log(std::abs(early.at(8, 16)) / std::abs(rho.at(8, 16)));
  const double dx1 = rho.positions[8] - rho.positions[12];
  const double dx2 = rho.positions[8] - rho.positions[16];
  REQUIRE_THAT(dx2 / dx1, Catch::Matchers::WithinRel(2.0, 1e-12));
  CHECK_THAT(l2 / l1, Catch::Matchers::WithinRel(4.0, 1e-9));
}

TEST_CASE("stepped evolution matches the closed-form map") {
  const auto rho = standard_two_peak();
  const double D = 1.7, t = 1.9;
  const auto direct = evolve_pure_decoherence(rho, D, t);
  const auto stepped = evolve_pure_decoherence_stepped(rho, D, t, 1000);
  double worst = 0.0;
  for (std::size_t k = 0; k < rho.values.size(); ++k)
    worst = std::max(worst, std::abs(direct.values[k] - stepped.values[k]));
  CHECK(worst < 1e-6);
  CHECK_THROWS_AS(evolve_pure_decoherence_stepped(rho, D, t, 0),
                  std::invalid_argument);
}

TEST_CASE("negative time is rejected") {
  CHECK_THROWS_AS(evolve_pure_decoherence(standard_two_peak(), 1.0, -0.1),
                  std::invalid_argument);
}

TEST_CASE("diffusion constant from momentum spread") {
  SECTION("degenerate inputs") {
    CHECK(identify_kappa_D(0.0, 1.0) == 0.0);
    CHECK_THROWS_AS(identify_kappa_D(1.0, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(identify_kappa_D(-1.0, 1.0), std::invalid_argument);
  }
  SECTION("doubling the interaction time halves D^2") {
    const double d1 = identify_kappa_D(2.2, 1.0);
    const double d2 = identify_kappa_D(2.2, 2.0);
    CHECK_THAT(d2 * d2, Catch::Matchers::WithinRel(0.5 * d1 * d1, 1e-12));
  }
  SECTION("round trip against the gaussian contrast model") {
    // evolving for tau must reproduce |beta_total_gaussian_limit| at every
    // element separation of the grid
    const auto p = DecoherenceParameters::from_counts(8.1, 3.5);
    const double tau = 1.0;
    const double D = identify_kappa_D(p.kappa, tau);
    for (int i = 0; i <= 40; ++i) {
      const double d = 1.4 * i / 40.0;
      const double me = std::exp(-D * D * d * d * tau);
      const double gl = std::abs(beta_total_gaussian_limit(d, p));
      CHECK_THAT(me, Catch::Matchers::WithinAbs(gl, 1e-9));
    }
  }
}
