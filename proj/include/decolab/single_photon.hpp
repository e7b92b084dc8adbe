#pragma once

#include <cmath>
#include <complex>
#include <stdexcept>

#include "decolab/emission.hpp"
#include "decolab/quadrature.hpp"
#include "decolab/units.hpp"

namespace decolab {

// Complex decoherence factor. |beta| is the contrast retained relative to the
// no-scattering fringe, arg(beta) the phase shift imprinted on it.
using Coherence = std::complex<double>;

// Decoherence factor after exactly one scattered photon: the characteristic
// function of the momentum kick evaluated at the arm separation,
//   beta(d) = integral du p(u) exp(-i k0 (1 - u) d).
// Under this exp(-i dk d) convention the mean recoil +k0 appears as a phase
// that retreats by 2*pi per wavelength of separation; only |beta| and the
// magnitude of the phase slope are observable.
inline Coherence beta_single(double d_over_lambda,
                             const MomentumTransferDistribution& dist) {
  const double x = two_pi * d_over_lambda;  // k0*d in radians
  if (dist.is_point_mass()) {
    const double dk = 1.0 - *dist.point_mass;
    return {std::cos(dk * x), -std::sin(dk * x)};
  }
  const double norm = dist.norm();
  if (std::abs(norm - 1.0) > 1e-6)
    throw std::invalid_argument("beta_single: momentum distribution is not normalized");
  const Coherence raw = integrate(
      [&](double u) -> Coherence {
        const double phi = (1.0 - u) * x;
        return dist.density(u) * Coherence(std::cos(phi), -std::sin(phi));
      },
      -1.0, 1.0, 1e-10);
  return raw / norm;
}

inline Coherence beta_single(double d_over_lambda) {
  return beta_single(d_over_lambda, MomentumTransferDistribution::dipole());
}

// Same quantity for the dipole marginal in closed form:
//   beta(d) = exp(-i x) * C(x),  x = 2*pi*d/lambda,
//   C(x) = (3/2) [ (x^2 - 1) sin x + x cos x ] / x^3.
// The numerator cancels to (2/3)x^3 as x -> 0, so the direct form loses
// roughly three digits per decade below x ~ 1; a Taylor expansion takes over
// below |x| = 0.1, where both branches are accurate to ~4e-14.
inline Coherence beta_single_closed_form(double d_over_lambda) {
  const double x = two_pi * d_over_lambda;
  double c;
  if (std::abs(x) < 0.1) {
    const double x2 = x * x;
    c = 1.0 + x2 * (-1.0 / 5.0 + x2 * (3.0 / 280.0 - x2 / 3780.0));
  } else {
    c = 1.5 * ((x * x - 1.0) * std::sin(x) + x * std::cos(x)) / (x * x * x);
  }
  return {c * std::cos(x), -c * std::sin(x)};
}

}  // namespace decolab
