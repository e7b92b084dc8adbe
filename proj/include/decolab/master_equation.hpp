#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <stdexcept>
#include <utility>
#include <vector>

#include "decolab/units.hpp"

namespace decolab {
namespace detail {

// Smallest eigenvalue of a real symmetric matrix by cyclic Jacobi sweeps.
// Cubic per sweep; meant for validation on small grids, not production
// linear algebra.
inline double jacobi_min_eigenvalue(std::vector<double> s, std::size_t n) {
  auto at = [&](std::size_t i, std::size_t j) -> double& { return s[i * n + j]; };
  for (int sweep = 0; sweep < 64; ++sweep) {
    double off = 0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j) off += at(i, j) * at(i, j);
    if (off < 1e-26 * double(n) * double(n)) break;
    for (std::size_t p = 0; p < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double apq = at(p, q);
        if (apq == 0.0) continue;
        const double theta = 0.5 * (at(q, q) - at(p, p)) / apq;
        const double t = (theta >= 0 ? 1.0 : -1.0) /
                         (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double sn = t * c;
        for (std::size_t k = 0; k < n; ++k) {
          const double skp = at(k, p);
          const double skq = at(k, q);
          at(k, p) = c * skp - sn * skq;
          at(k, q) = sn * skp + c * skq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double spk = at(p, k);
          const double sqk = at(q, k);
          at(p, k) = c * spk - sn * sqk;
          at(q, k) = sn * spk + c * sqk;
        }
      }
    }
  }
  double lo = at(0, 0);
  for (std::size_t i = 1; i < n; ++i) lo = std::min(lo, at(i, i));
  return lo;
}

// Hermitian H = A + iB embeds as the real symmetric [[A, -B], [B, A]] with
// the same spectrum (doubled multiplicity).
inline double hermitian_min_eigenvalue(const std::vector<std::complex<double>>& h,
                                       std::size_t m) {
  const std::size_t n = 2 * m;
  std::vector<double> s(n * n, 0.0);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < m; ++j) {
      const double a = h[i * m + j].real();
      const double b = h[i * m + j].imag();
      s[i * n + j] = a;
      s[(i + m) * n + (j + m)] = a;
      s[i * n + (j + m)] = -b;
      s[(i + m) * n + j] = b;
    }
  }
  return jacobi_min_eigenvalue(std::move(s), n);
}

}  // namespace detail

// Spatial density matrix rho(x_i, x_j) sampled on a uniform position grid,
// positions in units of lambda. Physical states are Hermitian and positive
// semidefinite; the PSD check diagonalizes, so it only runs on small grids.
struct DensityMatrixGrid {
  std::vector<double> positions;               // size m, ascending, uniform
  std::vector<std::complex<double>> values;    // row-major m x m

  std::size_t size() const { return positions.size(); }

  std::complex<double>& at(std::size_t i, std::size_t j) {
    return values[i * size() + j];
  }
  const std::complex<double>& at(std::size_t i, std::size_t j) const {
    return values[i * size() + j];
  }

  double grid_step() const {
    if (positions.size() < 2)
      throw std::invalid_argument("density matrix: grid needs at least 2 points");
    return positions[1] - positions[0];
  }

  // Trace with the grid measure, sum_i rho(x_i, x_i) * dx.
  double trace_grid_weighted() const {
    double tr = 0;
    for (std::size_t i = 0; i < size(); ++i) tr += at(i, i).real();
    return tr * grid_step();
  }

  static constexpr std::size_t psd_check_limit = 96;

  void validate(bool check_psd = true) const {
    const std::size_t m = size();
    if (m < 2) throw std::invalid_argument("density matrix: grid needs at least 2 points");
    if (values.size() != m * m)
      throw std::invalid_argument("density matrix: values are not m x m");
    const double dx = grid_step();
    if (!(dx > 0)) throw std::invalid_argument("density matrix: grid must ascend");
    for (std::size_t i = 1; i < m; ++i)
      if (std::abs((positions[i] - positions[i - 1]) - dx) > 1e-9 * dx)
        throw std::invalid_argument("density matrix: grid must be uniform");

    double scale = 0;
    for (std::size_t i = 0; i < m; ++i) scale = std::max(scale, std::abs(at(i, i)));
    const double tol = 1e-9 * std::max(scale, 1e-300);
    for (std::size_t i = 0; i < m; ++i) {
      if (std::abs(at(i, i).imag()) > tol)
        throw std::invalid_argument("density matrix: diagonal must be real");
      for (std::size_t j = i + 1; j < m; ++j)
        if (std::abs(at(i, j) - std::conj(at(j, i))) > tol)
          throw std::invalid_argument("density matrix: not Hermitian");
    }
    if (check_psd && m <= psd_check_limit) {
      const double lo = detail::hermitian_min_eigenvalue(values, m);
      if (lo < -1e-9 * std::max(scale, 1.0))
        throw std::invalid_argument("density matrix: not positive semidefinite");
    }
  }

  // Pure state of two Gaussian wave packets separated by `separation`,
  // rho = psi psi^dagger, normalized to unit grid-weighted trace.
  static DensityMatrixGrid two_peak(std::size_t m, double x_min, double x_max,
                                    double separation, double width) {
    if (m < 2) throw std::invalid_argument("two_peak: grid needs at least 2 points");
    if (!(x_max > x_min)) throw std::invalid_argument("two_peak: empty range");
    if (!(width > 0)) throw std::invalid_argument("two_peak: width must be positive");
    DensityMatrixGrid rho;
    rho.positions.resize(m);
    const double dx = (x_max - x_min) / double(m - 1);
    for (std::size_t i = 0; i < m; ++i) rho.positions[i] = x_min + double(i) * dx;
    const double center = 0.5 * (x_min + x_max);
    const double c1 = center - 0.5 * separation;
    const double c2 = center + 0.5 * separation;
    std::vector<double> psi(m);
    double nrm = 0;
    for (std::size_t i = 0; i < m; ++i) {
      const double x = rho.positions[i];
      const double a = (x - c1) / (2.0 * width);
      const double b = (x - c2) / (2.0 * width);
      psi[i] = std::exp(-a * a) + std::exp(-b * b);
      nrm += psi[i] * psi[i] * dx;
    }
    const double inv = 1.0 / std::sqrt(nrm);
    for (double& v : psi) v *= inv;
    rho.values.resize(m * m);
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = 0; j < m; ++j)
        rho.values[i * m + j] = psi[i] * psi[j];
    return rho;
  }
};

// Pure position decoherence: every off-diagonal element decays at a rate set
// by the separation of the two positions it connects,
//   rho(x, x', t) = rho(x, x', 0) * exp(-D^2 (x - x')^2 t).
// Diagonals (x = x') never decay, so the trace is conserved exactly; the
// elementwise factor is a Gaussian kernel in (x - x'), which is positive
// semidefinite, so Schur multiplication preserves PSD as well.
inline DensityMatrixGrid evolve_pure_decoherence(const DensityMatrixGrid& rho,
                                                 double diffusion_d, double t) {
  if (!(t >= 0)) throw std::invalid_argument("evolve: time must be non-negative");
  rho.validate(false);
  DensityMatrixGrid out = rho;
  const std::size_t m = rho.size();
  const double d2t = diffusion_d * diffusion_d * t;
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < m; ++j) {
      const double dx = rho.positions[i] - rho.positions[j];
      out.values[i * m + j] *= std::exp(-d2t * dx * dx);
    }
  }
  return out;
}

// Same evolution taken in n_steps equal increments. The map is exactly
// multiplicative, so this should agree with the closed form to round-off;
// it exists to exercise the stepping machinery.
inline DensityMatrixGrid evolve_pure_decoherence_stepped(const DensityMatrixGrid& rho,
                                                         double diffusion_d,
                                                         double t,
                                                         std::size_t n_steps) {
  if (n_steps < 1) throw std::invalid_argument("evolve: need at least one step");
  DensityMatrixGrid out = rho;
  const double dt = t / double(n_steps);
  for (std::size_t s = 0; s < n_steps; ++s)
    out = evolve_pure_decoherence(out, diffusion_d, dt);
  return out;
}

// Decoherence rate that reproduces a Gaussian contrast loss of width kappa
// (k0 units) after evolving for tau: matching exp(-D^2 d^2 tau) against
// exp(-kappa^2 (k0 d)^2 / 2) at every separation gives
//   D = 2 pi kappa / sqrt(2 tau)
// with positions measured in lambda (the 2 pi is k0 lambda).
inline double identify_kappa_D(double kappa_in_k0, double tau) {
  if (!(kappa_in_k0 >= 0))
    throw std::invalid_argument("identify_kappa_D: kappa must be non-negative");
  if (!(tau > 0)) throw std::invalid_argument("identify_kappa_D: tau must be positive");
  return two_pi * kappa_in_k0 / std::sqrt(2.0 * tau);
}

}  // namespace decolab
