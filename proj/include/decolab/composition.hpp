#pragma once

#include <cmath>
#include <complex>
#include <limits>
#include <stdexcept>

#include "decolab/photon_statistics.hpp"
#include "decolab/single_photon.hpp"
#include "decolab/units.hpp"

namespace decolab {

// Decoherence from a random number of independent photon kicks: each photon
// multiplies the coherence by beta, so
//   beta_total = sum_n P(n) beta^n.
// For Poisson P(n) this is the generating function exp(n_bar (beta - 1)).
inline Coherence beta_total(const PhotonNumberDistribution& pn, Coherence beta) {
  pn.validate();
  // |beta| <= 1 up to round-off by construction; clamp so high powers cannot
  // drift above unit magnitude
  const double m = std::abs(beta);
  if (m > 1.0) beta /= m;
  Coherence acc = 0.0;
  Coherence power = 1.0;
  for (double w : pn.weights) {
    acc += w * power;
    power *= beta;
  }
  return acc;
}

// Gaussian model of n dipole kicks: magnitude exp(-n sigma_k^2 (k0 d)^2 / 2)
// with sigma_k^2 = 2/5, phase -n k0 d (one mean recoil per photon, under the
// exp(-i dk d) convention). Accurate once n is large enough for the summed
// kick to look Gaussian.
inline Coherence beta_n_gaussian(double d_over_lambda, unsigned n) {
  const double x = two_pi * d_over_lambda;
  const double mag = std::exp(-0.5 * double(n) * 0.4 * x * x);
  const double phase = -double(n) * x;
  return {mag * std::cos(phase), mag * std::sin(phase)};
}

// Width of the total momentum spread: photon-count noise contributes k0 per
// count, emission direction sigma_k per photon,
//   kappa^2 = n_bar sigma_k^2 + sigma_n^2 k0^2,   sigma_k^2 = (2/5) k0^2.
inline double kappa_from_counts(double n_bar, double sigma_n) {
  if (!(n_bar >= 0.0) || !(sigma_n >= 0.0))
    throw std::invalid_argument("kappa_from_counts: moments must be non-negative");
  return std::sqrt(0.4 * n_bar + sigma_n * sigma_n);
}

// A detector that accepts only atoms deflected within ~kappa_d of the mean
// post-selects the less-disturbed ones; acceptance acts as a Gaussian window
// in momentum, so precisions add:
//   1/kappa'^2 = 1/kappa^2 + 1/kappa_d^2.
// kappa_d = +inf recovers the uncorrected width.
inline double kappa_prime(double kappa, double kappa_d) {
  if (!(kappa >= 0.0))
    throw std::invalid_argument("kappa_prime: kappa must be non-negative");
  if (!(kappa_d > 0.0))
    throw std::invalid_argument("kappa_prime: kappa_d must be positive");
  if (std::isinf(kappa_d)) return kappa;
  if (kappa == 0.0) return 0.0;
  return 1.0 / std::sqrt(1.0 / (kappa * kappa) + 1.0 / (kappa_d * kappa_d));
}

// Moments of the scattering process plus the detector acceptance window.
struct DecoherenceParameters {
  double n_bar = 0.0;
  double sigma_n = 0.0;
  double kappa = 0.0;        // momentum spread, k0 units
  double kappa_d = std::numeric_limits<double>::infinity();
  double kappa_prime = 0.0;  // spread after detector post-selection

  static DecoherenceParameters from_counts(
      double n_bar, double sigma_n,
      double kappa_d = std::numeric_limits<double>::infinity()) {
    DecoherenceParameters p;
    p.n_bar = n_bar;
    p.sigma_n = sigma_n;
    p.kappa = kappa_from_counts(n_bar, sigma_n);
    p.kappa_d = kappa_d;
    p.kappa_prime = decolab::kappa_prime(p.kappa, kappa_d);
    return p;
  }
};

// Gaussian limit of beta_total: contrast decays as a Gaussian in separation
// with width set by kappa' while the phase keeps the full mean deflection
// (post-selection narrows the spread but the detector correction is applied
// to the magnitude only).
inline Coherence beta_total_gaussian_limit(double d_over_lambda,
                                           const DecoherenceParameters& p) {
  const double x = two_pi * d_over_lambda;
  const double mag = std::exp(-0.5 * p.kappa_prime * p.kappa_prime * x * x);
  const double phase = -p.n_bar * x;
  return {mag * std::cos(phase), mag * std::sin(phase)};
}

}  // namespace decolab
