#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <complex>
#include <limits>

#include "decolab/composition.hpp"
#include "decolab/rng.hpp"

using namespace decolab;

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

TEST_CASE("beta_total basics") {
  SECTION("no photons leave the coherence untouched") {
    SplitMix64 rng(2);
    for (int i = 0; i < 20; ++i) {
      const Coherence beta = beta_single_closed_form(2.0 * rng.uniform());
      const Coherence total = beta_total(delta_pn(0), beta);
      CHECK(total == Coherence(1.0, 0.0));
    }
  }
  SECTION("exactly n photons raise beta to the n-th power") {
    const Coherence beta = beta_single_closed_form(0.21);
    const Coherence total = beta_total(delta_pn(3), beta);
    CHECK(std::abs(total - beta * beta * beta) < 1e-15);
  }
  SECTION("contrast is bounded by 1 and exact at d = 0") {
    SplitMix64 rng(5);
    for (int i = 0; i < 40; ++i) {
      const auto pn = i % 2 ? poisson_pn(8.0 * rng.uniform())
                            : truncated_gaussian_pn(6.0 * rng.uniform(),
                                                    0.2 + 3.0 * rng.uniform());
      CHECK(std::abs(beta_total(pn, beta_single_closed_form(3.0 * rng.uniform()))) <=
            1.0 + 1e-9);
      CHECK_THAT(std::abs(beta_total(pn, beta_single_closed_form(0.0))),
                 Catch::Matchers::WithinAbs(1.0, 1e-9));
    }
  }
  SECTION("invalid weights are rejected") {
    PhotonNumberDistribution bad{{0.3, 0.3}};
    CHECK_THROWS_AS(beta_total(bad, Coherence(0.5, 0.0)), std::invalid_argument);
  }
}

TEST_CASE("poisson composition equals the generating function") {
  // sum_n P(n) beta^n == exp(nbar (beta - 1)) for Poisson weights; the
  // truncated sum may differ only by the tail mass
  for (double nbar : {0.1, 0.9, 2.6, 8.2}) {
    const auto pn = poisson_pn(nbar);
    for (int i = 0; i <= 10; ++i) {
      const double d = 0.05 + 1.35 * i / 10.0;
      const Coherence beta = beta_single_closed_form(d);
      const Coherence lhs = beta_total(pn, beta);
      const Coherence rhs = std::exp(nbar * (beta - 1.0));
      CHECK(std::abs(lhs - rhs) < 1e-10);
    }
  }
}

TEST_CASE("contrast saturates at the probability of scattering nothing") {
  // far field: every scattered atom is fully dephased, survivors are the
  // n = 0 atoms, so |beta_total| -> P(0)
  const auto pn = poisson_pn(0.9);
  const double p0 = std::exp(-0.9);
  for (double d : {3.0, 3.5, 4.0, 6.0, 10.0}) {
    CHECK_THAT(std::abs(beta_total(pn, beta_single_closed_form(d))),
               Catch::Matchers::WithinAbs(p0, 0.01));
  }
  // the residue beyond P(0) shrinks with the single-photon envelope
  const double near = std::abs(std::abs(beta_total(pn, beta_single_closed_form(3.0))) - p0);
  const double far = std::abs(std::abs(beta_total(pn, beta_single_closed_form(10.0))) - p0);
  CHECK(far < near);
}

TEST_CASE("gaussian n-photon model") {
  SECTION("no separation, no loss") {
    CHECK(beta_n_gaussian(0.0, 5) == Coherence(1.0, 0.0));
  }
  SECTION("matches the exact fourth power at small separation") {
    const Coherence exact = std::pow(beta_single(0.1), 4);
    const Coherence gauss = beta_n_gaussian(0.1, 4);
    CHECK(std::abs(gauss - exact) < 0.05);
  }
  SECTION("exact scaling in n d^2") {
    SplitMix64 rng(8);
    for (int i = 0; i < 30; ++i) {
      const double d = 0.5 * rng.uniform();
      const unsigned n = 1 + static_cast<unsigned>(9.0 * rng.uniform());
      const double direct = std::abs(beta_n_gaussian(d, n));
      const double rescaled = std::abs(beta_n_gaussian(d * std::sqrt(double(n)), 1));
      CHECK_THAT(direct, Catch::Matchers::WithinRel(rescaled, 1e-12));
    }
  }
}

TEST_CASE("momentum spread composition") {
  SECTION("clean beam has zero spread") {
    CHECK(kappa_from_counts(0.0, 0.0) == 0.0);
  }
  SECTION("values behind the published contrast widths") {
    CHECK_THAT(kappa_from_counts(8.1, 3.5),
               Catch::Matchers::WithinAbs(3.935733731, 1e-8));
    CHECK_THAT(kappa_from_counts(4.8, 1.8),
               Catch::Matchers::WithinAbs(2.271563338, 1e-8));
    CHECK_THROWS_AS(kappa_from_counts(-1.0, 1.0), std::invalid_argument);
  }
}

TEST_CASE("detector acceptance narrows the effective spread") {
  SECTION("published operating points") {
    const double kp1 = kappa_prime(kappa_from_counts(8.1, 3.5), 3.3);
    CHECK_THAT(kp1, Catch::Matchers::WithinAbs(2.528728790, 1e-8));
    CHECK(kp1 > 2.4);
    CHECK(kp1 < 2.6);
    const double kp2 = kappa_prime(kappa_from_counts(4.8, 1.8), 3.3);
    CHECK_THAT(kp2, Catch::Matchers::WithinAbs(1.871118412, 1e-8));
    CHECK(kp2 > 1.7);
    CHECK(kp2 < 1.9);
  }
  SECTION("wide-open detector changes nothing") {
    CHECK(kappa_prime(2.7, kInf) == 2.7);
    CHECK(kappa_prime(0.0, 3.3) == 0.0);
  }
  SECTION("symmetric and below both inputs") {
    SplitMix64 rng(13);
    for (int i = 0; i < 50; ++i) {
      const double a = 0.1 + 6.0 * rng.uniform();
      const double b = 0.1 + 6.0 * rng.uniform();
      const double kp = kappa_prime(a, b);
      CHECK_THAT(kp, Catch::Matchers::WithinRel(kappa_prime(b, a), 1e-14));
      CHECK(kp <= std::min(a, b));
    }
  }
  SECTION("non-positive acceptance is rejected") {
    CHECK_THROWS_AS(kappa_prime(1.0, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(kappa_prime(1.0, -2.0), std::invalid_argument);
  }
}

TEST_CASE("from_counts assembles all derived spreads") {
  const auto p = DecoherenceParameters::from_counts(8.1, 3.5, 3.3);
  CHECK(p.n_bar == 8.1);
  CHECK(p.sigma_n == 3.5);
  CHECK_THAT(p.kappa, Catch::Matchers::WithinAbs(3.935733731, 1e-8));
  CHECK_THAT(p.kappa_prime, Catch::Matchers::WithinAbs(2.528728790, 1e-8));
  const auto open = DecoherenceParameters::from_counts(8.1, 3.5);
  CHECK(open.kappa_prime == open.kappa);
}

TEST_CASE("gaussian limit of the composed contrast") {
  SECTION("unity at zero separation, gaussian log-ratio in d") {
    const auto p = DecoherenceParameters::from_counts(8.2, std::sqrt(8.2));
    CHECK(std::abs(beta_total_gaussian_limit(0.0, p)) == 1.0);
    SplitMix64 rng(21);
    for (int i = 0; i < 20; ++i) {
      const double d = 0.02 + 0.1 * rng.uniform();
      const double l1 = std::log(std::abs(beta_total_gaussian_limit(d, p)));
      const double l2 = std::log(std::abs(beta_total_gaussian_limit(2.0 * d, p)));
      CHECK_THAT(l2 / l1, Catch::Matchers::WithinRel(4.0, 1e-10));
    }
  }
  SECTION("tracks the exact composition at the published operating point") {
    const auto pn = truncated_gaussian_pn(8.2, std::sqrt(8.2));
    const auto p = DecoherenceParameters::from_counts(pn.mean(), std::sqrt(pn.variance()));
    const double exact = std::abs(beta_total(pn, beta_single_closed_form(0.1)));
    const double gauss = std::abs(beta_total_gaussian_limit(0.1, p));
    CHECK(std::abs(gauss - exact) < 0.02);
  }
  SECTION("approach is monotone in the mean count") {
    // max gap over d in [0, 0.2] shrinks as nbar grows
    double prev = 1.0;
    for (double nbar : {2.0, 4.0, 8.0, 16.0}) {
      const auto pn = truncated_gaussian_pn(nbar, std::sqrt(nbar));
      const auto p =
          DecoherenceParameters::from_counts(pn.mean(), std::sqrt(pn.variance()));
      double gap = 0.0;
      for (int i = 0; i <= 200; ++i) {
        const double d = 0.2 * i / 200.0;
        gap = std::max(gap,
                       std::abs(std::abs(beta_total(pn, beta_single_closed_form(d))) -
                                std::abs(beta_total_gaussian_limit(d, p))));
      }
      CHECK(gap < prev);
      prev = gap;
    }
  }
  SECTION("literal poisson composition converges the same way") {
    // same property with true Poisson weights and nominal moments; the gap
    // is larger but still shrinks monotonically
    double prev = 1.0;
    for (double nbar : {2.0, 4.0, 8.0, 16.0}) {
      const auto pn = poisson_pn(nbar);
      const auto p = DecoherenceParameters::from_counts(nbar, std::sqrt(nbar));
      double gap = 0.0;
      for (int i = 0; i <= 200; ++i) {
        const double d = 0.2 * i / 200.0;
        gap = std::max(gap,
                       std::abs(std::abs(beta_total(pn, beta_single_closed_form(d))) -
                                std::abs(beta_total_gaussian_limit(d, p))));
      }
      CHECK(gap < prev);
      prev = gap;
    }
  }
  SECTION("phase carries the full mean deflection") {
    const auto p = DecoherenceParameters::from_counts(8.1, 3.5, 3.3);
    const double d = 0.03;
    const auto b = beta_total_gaussian_limit(d, p);
    // slope -nbar k0: arg(beta) = -nbar * 2 pi d (mod 2 pi)
    const double expected = -8.1 * two_pi * d;
    const double got = std::arg(b);
    const double wrapped =
        expected - two_pi * std::round((expected - got) / two_pi);
    CHECK_THAT(got, Catch::Matchers::WithinAbs(wrapped, 1e-12));
  }
}
