#pragma once

#include <numbers>

namespace decolab {

inline constexpr double two_pi = 2.0 * std::numbers::pi;

// Everything internal is dimensionless: separations are measured in units of
// the photon wavelength lambda and momenta in units of the photon recoil
// k0 = 2*pi/lambda, so k0*lambda = 2*pi holds exactly. The phase a momentum
// component k picks up across a separation d is then 2*pi * (k/k0) * (d/lambda).
// SI values appear only at the I/O boundary.
struct UnitsConvention {
  double lambda_nm = 590.0;  // sodium D line

  double lambda_m() const { return lambda_nm * 1e-9; }
  double k0_rad_per_m() const { return two_pi / lambda_m(); }

  double separation_to_si(double d_over_lambda) const { return d_over_lambda * lambda_m(); }
  double separation_from_si(double d_m) const { return d_m / lambda_m(); }
  double momentum_to_si(double k_over_k0) const { return k_over_k0 * k0_rad_per_m(); }
  double momentum_from_si(double k_rad_per_m) const { return k_rad_per_m / k0_rad_per_m(); }
};

// Interference phase k*d in radians for k in k0 units and d in lambda units.
inline double phase_k0_lambda(double k_over_k0, double d_over_lambda) {
  return two_pi * k_over_k0 * d_over_lambda;
}

}  // namespace decolab
