#pragma once

#include <cmath>
#include <functional>
#include <optional>
#include <stdexcept>

#include "decolab/quadrature.hpp"

namespace decolab {

// Angular distribution of a single spontaneously emitted photon, reduced to
// the direction cosine u = k_x/k0 along the laser (= arm separation) axis.
// For dipole radiation averaged over the azimuthal angle the marginal is
//   p(u) = (3/8)(1 + u^2),  u in [-1, 1].
// Absorption gives the atom +k0, the emitted photon carries off u*k0, so the
// net kick per scattering event is Delta k = k0*(1 - u), supported on
// [0, 2k0] with mean +k0 (radiation pressure pushes along the beam).
inline double dipole_marginal(double u) {
  if (u < -1.0 || u > 1.0) return 0.0;
  return 0.375 * (1.0 + u * u);
}

inline double isotropic_marginal(double u) {
  if (u < -1.0 || u > 1.0) return 0.0;
  return 0.5;
}

// Distribution of the emission direction cosine. Either a density on [-1, 1]
// or a point mass (deterministic emission direction, mostly for tests where
// every moment is known exactly).
struct MomentumTransferDistribution {
  std::function<double(double)> density;
  std::optional<double> point_mass;

  static MomentumTransferDistribution dipole() {
    return {dipole_marginal, std::nullopt};
  }
  static MomentumTransferDistribution isotropic() {
    return {isotropic_marginal, std::nullopt};
  }
  static MomentumTransferDistribution delta_at(double u0) {
    if (u0 < -1.0 || u0 > 1.0)
      throw std::invalid_argument("emission: point mass outside [-1, 1]");
    return {nullptr, u0};
  }

  bool is_point_mass() const { return point_mass.has_value(); }

  double operator()(double u) const {
    if (is_point_mass())
      throw std::logic_error("emission: point mass has no density");
    return density(u);
  }

  double norm() const {
    if (is_point_mass()) return 1.0;
    return integrate([this](double u) { return density(u); }, -1.0, 1.0, 1e-12);
  }

  // <u^2> in k0^2 units (uncentered; the marginals here are symmetric).
  double second_moment() const {
    if (is_point_mass()) return *point_mass * *point_mass;
    return integrate([this](double u) { return u * u * density(u); }, -1.0, 1.0, 1e-12);
  }
};

// rms transverse momentum of one emitted photon, in k0 units.
// For the dipole marginal this is sqrt(2/5) k0.
inline double sigma_k(const MomentumTransferDistribution& dist) {
  return std::sqrt(dist.second_moment());
}

inline double sigma_k() { return sigma_k(MomentumTransferDistribution::dipole()); }

}  // namespace decolab
