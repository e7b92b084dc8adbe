#pragma once

#include <cmath>
#include <complex>
#include <stdexcept>
#include <type_traits>

namespace decolab {
namespace gk15 {

// 15-point Kronrod / 7-point Gauss pair on [-1, 1] (QUADPACK dqk15 values).
// Even-indexed Kronrod abscissae coincide with the embedded Gauss points.
inline constexpr double xgk[8] = {
    0.9914553711208126, 0.9491079123427585, 0.8648644233597691,
    0.7415311855993944, 0.5860872354676911, 0.4058451513773972,
    0.2077849550078985, 0.0};
inline constexpr double wgk[8] = {
    0.02293532201052922, 0.06309209262997855, 0.1047900103222502,
    0.1406532597155259,  0.1690047266392679,  0.1903505780647854,
    0.2044329400752989,  0.2094821410847278};
inline constexpr double wg[4] = {
    0.1294849661688697, 0.2797053914892767, 0.3818300505051189,
    0.4179591836734694};

}  // namespace gk15

namespace detail {

template <class V>
double abs_value(const V& v) {
  if constexpr (std::is_floating_point_v<V>) {
    return std::abs(v);
  } else {
    return std::abs(v);  // std::complex
  }
}

// One Kronrod panel; err is |K15 - G7|, the usual local error estimate.
template <class F>
auto kronrod_panel(F& f, double a, double b, double& err) {
  const double mid = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  using V = std::decay_t<decltype(f(mid))>;
  V result_gauss{};
  V result_kronrod{};
  for (int i = 0; i < 8; ++i) {
    const double dx = half * gk15::xgk[i];
    const V fsum = (i == 7) ? f(mid) : V(f(mid - dx) + f(mid + dx));
    result_kronrod += gk15::wgk[i] * fsum;
    if (i % 2 == 1) result_gauss += gk15::wg[i / 2] * fsum;
  }
  result_gauss *= half;
  result_kronrod *= half;
  err = abs_value(result_kronrod - result_gauss);
  return result_kronrod;
}

template <class F, class V>
void integrate_adaptive(F& f, double a, double b, double tol, int depth, V& acc) {
  double err;
  const V panel = kronrod_panel(f, a, b, err);
  if (err <= tol || depth <= 0) {
    if (depth <= 0 && err > tol)
      throw std::runtime_error("quadrature: interval subdivision limit reached");
    acc += panel;
    return;
  }
  const double mid = 0.5 * (a + b);
  integrate_adaptive(f, a, mid, 0.5 * tol, depth - 1, acc);
  integrate_adaptive(f, mid, b, 0.5 * tol, depth - 1, acc);
}

}  // namespace detail

// Adaptive Gauss-Kronrod integration of f over [a, b] to absolute tolerance
// abs_tol. Works for real- and complex-valued integrands; for complex ones
// the tolerance applies to the modulus of the local error estimate, which
// bounds each component.
template <class F>
auto integrate(F&& f, double a, double b, double abs_tol = 1e-10) {
  using V = std::decay_t<decltype(f(a))>;
  if (!(abs_tol > 0)) throw std::invalid_argument("quadrature: tolerance must be positive");
  V acc{};
  if (a == b) return acc;
  detail::integrate_adaptive(f, a, b, abs_tol, 48, acc);
  return acc;
}

}  // namespace decolab
