#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "decolab/composition.hpp"
#include "decolab/curve.hpp"
#include "decolab/single_photon.hpp"
#include "decolab/units.hpp"

namespace decolab {

struct FitOptions {
  unsigned max_iterations = 200;
  double ftol = 1e-12;
  double xtol = 1e-12;
};

struct FitResult {
  std::vector<std::string> parameter_names;
  std::vector<double> parameters;
  std::vector<double> standard_errors;
  std::vector<double> covariance;  // row-major k x k
  double chi2_per_dof = 0.0;
  bool converged = false;
  bool at_boundary = false;
  unsigned iterations = 0;

  std::size_t index_of(std::string_view name) const {
    for (std::size_t i = 0; i < parameter_names.size(); ++i)
      if (parameter_names[i] == name) return i;
    throw std::invalid_argument("fit result: no parameter named " + std::string(name));
  }
  double parameter(std::string_view name) const { return parameters[index_of(name)]; }
  double standard_error(std::string_view name) const {
    return standard_errors[index_of(name)];
  }
};

namespace detail {

using ResidualFn = std::function<std::vector<double>(const std::vector<double>&)>;

inline double chi2_of(const std::vector<double>& r) {
  double s = 0;
  for (double v : r) s += v * v;
  return s;
}

// Gaussian elimination with partial pivoting; false on (near-)singularity.
inline bool solve_linear(std::vector<double> a, std::vector<double> b,
                         std::size_t k, std::vector<double>& out) {
  for (std::size_t col = 0; col < k; ++col) {
    std::size_t piv = col;
    for (std::size_t r = col + 1; r < k; ++r)
      if (std::abs(a[r * k + col]) > std::abs(a[piv * k + col])) piv = r;
    if (std::abs(a[piv * k + col]) < 1e-300) return false;
    if (piv != col) {
      for (std::size_t c = 0; c < k; ++c) std::swap(a[col * k + c], a[piv * k + c]);
      std::swap(b[col], b[piv]);
    }
    const double inv = 1.0 / a[col * k + col];
    for (std::size_t r = col + 1; r < k; ++r) {
      const double f = a[r * k + col] * inv;
      if (f == 0.0) continue;
      for (std::size_t c = col; c < k; ++c) a[r * k + c] -= f * a[col * k + c];
      b[r] -= f * b[col];
    }
  }
  out.assign(k, 0.0);
  for (std::size_t ri = k; ri-- > 0;) {
    double s = b[ri];
    for (std::size_t c = ri + 1; c < k; ++c) s -= a[ri * k + c] * out[c];
    out[ri] = s / a[ri * k + ri];
  }
  return true;
}

inline std::vector<double> invert_symmetric(const std::vector<double>& a, std::size_t k) {
  std::vector<double> inv(k * k, 0.0);
  for (std::size_t col = 0; col < k; ++col) {
    std::vector<double> e(k, 0.0);
    e[col] = 1.0;
    std::vector<double> x;
    if (!solve_linear(a, e, k, x)) return {};
    for (std::size_t r = 0; r < k; ++r) inv[r * k + col] = x[r];
  }
  return inv;
}

// Central-difference Jacobian of the residual vector, column-major by
// parameter: J[i*k + j] = d r_i / d x_j.
inline std::vector<double> numeric_jacobian(const ResidualFn& resid,
                                            const std::vector<double>& x,
                                            std::size_t m) {
  const std::size_t k = x.size();
  std::vector<double> J(m * k);
  for (std::size_t j = 0; j < k; ++j) {
    const double h = 1e-6 * std::max(1.0, std::abs(x[j]));
    std::vector<double> xp = x, xm = x;
    xp[j] += h;
    xm[j] -= h;
    const auto rp = resid(xp);
    const auto rm = resid(xm);
    for (std::size_t i = 0; i < m; ++i) J[i * k + j] = (rp[i] - rm[i]) / (2.0 * h);
  }
  return J;
}

struct MinimizeResult {
  std::vector<double> x;
  std::vector<double> covariance;
  double chi2 = std::numeric_limits<double>::infinity();
  bool converged = false;
  unsigned iterations = 0;
};

// Nelder-Mead on chi2, used only when the gradient path stalls (e.g. a start
// so far off that finite differences are useless). Returns the best vertex.
inline std::vector<double> nelder_mead(const ResidualFn& resid, std::vector<double> x0,
                                       unsigned budget) {
  const std::size_t k = x0.size();
  auto f = [&](const std::vector<double>& x) { return chi2_of(resid(x)); };
  std::vector<std::vector<double>> v(k + 1, x0);
  std::vector<double> fv(k + 1);
  for (std::size_t j = 0; j < k; ++j)
    v[j + 1][j] += 0.25 * std::max(1.0, std::abs(x0[j]));
  for (std::size_t j = 0; j <= k; ++j) fv[j] = f(v[j]);
  unsigned evals = k + 1;
  while (evals < budget) {
    std::vector<std::size_t> ord(k + 1);
    std::iota(ord.begin(), ord.end(), std::size_t{0});
    std::sort(ord.begin(), ord.end(), [&](auto a, auto b) { return fv[a] < fv[b]; });
    const std::size_t best = ord[0], worst = ord[k];
    if (std::abs(fv[worst] - fv[best]) <= 1e-14 * (std::abs(fv[best]) + 1e-14)) break;
    std::vector<double> centroid(k, 0.0);
    for (std::size_t j = 0; j <= k; ++j)
      if (j != worst)
        for (std::size_t c = 0; c < k; ++c) centroid[c] += v[j][c] / double(k);
    auto blend = [&](double t) {
      std::vector<double> p(k);
      for (std::size_t c = 0; c < k; ++c)
        p[c] = centroid[c] + t * (centroid[c] - v[worst][c]);
      return p;
    };
    auto refl = blend(1.0);
    double fr = f(refl);
    ++evals;
    if (fr < fv[best]) {
      auto exp_ = blend(2.0);
      const double fe = f(exp_);
      ++evals;
      if (fe < fr) { v[worst] = exp_; fv[worst] = fe; }
      else { v[worst] = refl; fv[worst] = fr; }
    } else if (fr < fv[ord[k - 1]]) {
      v[worst] = refl;
      fv[worst] = fr;
    } else {
      auto con = blend(fr < fv[worst] ? 0.5 : -0.5);
      const double fc = f(con);
      ++evals;
      if (fc < std::min(fr, fv[worst])) { v[worst] = con; fv[worst] = fc; }
      else {
        for (std::size_t j = 0; j <= k; ++j) {
          if (j == best) continue;
          for (std::size_t c = 0; c < k; ++c)
            v[j][c] = v[best][c] + 0.5 * (v[j][c] - v[best][c]);
          fv[j] = f(v[j]);
          ++evals;
        }
      }
    }
  }
  std::size_t best = 0;
  for (std::size_t j = 1; j <= k; ++j)
    if (fv[j] < fv[best]) best = j;
  return v[best];
}

// Levenberg-Marquardt with numeric Jacobians. Residuals are already
// weighted by the data uncertainties, so the covariance at the solution is
// (J^T J)^{-1} directly.
inline MinimizeResult levenberg_marquardt(const ResidualFn& resid,
                                          std::vector<double> x,
                                          const FitOptions& opt) {
  const std::size_t k = x.size();
  MinimizeResult res;

  std::vector<double> r = resid(x);
  const std::size_t m = r.size();
  double chi2 = chi2_of(r);
  if (!std::isfinite(chi2)) {
    x = nelder_mead(resid, x, 400);
    r = resid(x);
    chi2 = chi2_of(r);
    if (!std::isfinite(chi2)) {
      res.x = x;
      return res;  // nothing worked; not converged
    }
  }

  double lambda = 1e-3;
  bool converged = false;
  unsigned it = 0;
  for (; it < opt.max_iterations && !converged; ++it) {
    const auto J = numeric_jacobian(resid, x, m);
    std::vector<double> H(k * k, 0.0), g(k, 0.0);
    for (std::size_t i = 0; i < m; ++i) {
      for (std::size_t a = 0; a < k; ++a) {
        g[a] += J[i * k + a] * r[i];
        for (std::size_t b = a; b < k; ++b) H[a * k + b] += J[i * k + a] * J[i * k + b];
      }
    }
    for (std::size_t a = 0; a < k; ++a)
      for (std::size_t b = 0; b < a; ++b) H[a * k + b] = H[b * k + a];

    double gmax = 0;
    for (double v : g) gmax = std::max(gmax, std::abs(v));
    if (gmax < 1e-14 * std::max(1.0, chi2)) {
      converged = true;
      break;
    }

    bool stepped = false;
    for (int tries = 0; tries < 40; ++tries) {
      std::vector<double> A = H;
      for (std::size_t a = 0; a < k; ++a)
        A[a * k + a] += lambda * std::max(H[a * k + a], 1e-30);
      std::vector<double> rhs(k);
      for (std::size_t a = 0; a < k; ++a) rhs[a] = -g[a];
      std::vector<double> delta;
      if (!solve_linear(A, rhs, k, delta)) {
        lambda = std::min(lambda * 10.0, 1e14);
        continue;
      }
      std::vector<double> xn = x;
      double max_step = 0;
      for (std::size_t a = 0; a < k; ++a) {
        xn[a] += delta[a];
        max_step = std::max(max_step, std::abs(delta[a]) / std::max(1.0, std::abs(x[a])));
      }
      const auto rn = resid(xn);
      const double chi2n = chi2_of(rn);
      if (std::isfinite(chi2n) && chi2n <= chi2) {
        const double drop = chi2 - chi2n;
        x = std::move(xn);
        r = rn;
        chi2 = chi2n;
        lambda = std::max(lambda * 0.3, 1e-12);
        if (drop <= opt.ftol * (chi2 + opt.ftol) || max_step <= opt.xtol) converged = true;
        stepped = true;
        break;
      }
      lambda = std::min(lambda * 10.0, 1e14);
    }
    if (!stepped) {
      // no direction improves chi2 at machine scale: at a minimum
      converged = true;
    }
  }

  res.x = x;
  res.chi2 = chi2;
  res.converged = converged;
  res.iterations = it;
  const auto J = numeric_jacobian(resid, x, m);
  std::vector<double> H(k * k, 0.0);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t a = 0; a < k; ++a)
      for (std::size_t b = 0; b < k; ++b) H[a * k + b] += J[i * k + a] * J[i * k + b];
  res.covariance = invert_symmetric(H, k);
  return res;
}

inline std::vector<CurvePoint> sorted_by_separation(const DecoherenceCurve& curve) {
  std::vector<CurvePoint> pts = curve.points;
  std::stable_sort(pts.begin(), pts.end(), [](const CurvePoint& a, const CurvePoint& b) {
    return a.d_over_lambda < b.d_over_lambda;
  });
  return pts;
}

// Shared scaffolding for models with strictly positive parameters: the
// search runs over y = ln(theta), the covariance maps back through the
// delta method, Cov_theta = diag(theta) Cov_y diag(theta).
inline FitResult fit_positive_model(
    const std::vector<std::string>& names, const std::vector<double>& theta0,
    const ResidualFn& resid_in_theta, std::size_t n_residuals,
    const FitOptions& opt) {
  const std::size_t k = theta0.size();
  std::vector<double> y0(k);
  for (std::size_t j = 0; j < k; ++j) y0[j] = std::log(theta0[j]);
  ResidualFn resid_y = [&](const std::vector<double>& y) {
    std::vector<double> theta(k);
    for (std::size_t j = 0; j < k; ++j) theta[j] = std::exp(y[j]);
    return resid_in_theta(theta);
  };
  const auto lm = levenberg_marquardt(resid_y, y0, opt);

  FitResult out;
  out.parameter_names = names;
  out.parameters.resize(k);
  for (std::size_t j = 0; j < k; ++j) out.parameters[j] = std::exp(lm.x[j]);
  out.covariance.assign(k * k, std::numeric_limits<double>::quiet_NaN());
  out.standard_errors.assign(k, std::numeric_limits<double>::quiet_NaN());
  if (!lm.covariance.empty()) {
    for (std::size_t a = 0; a < k; ++a)
      for (std::size_t b = 0; b < k; ++b)
        out.covariance[a * k + b] =
            lm.covariance[a * k + b] * out.parameters[a] * out.parameters[b];
    for (std::size_t a = 0; a < k; ++a)
      out.standard_errors[a] = std::sqrt(std::max(0.0, out.covariance[a * k + a]));
  }
  const std::size_t dof = n_residuals > k ? n_residuals - k : 1;
  out.chi2_per_dof = lm.chi2 / double(dof);
  out.converged = lm.converged;
  out.iterations = lm.iterations;
  return out;
}

}  // namespace detail

// Mean photon number and count spread from a contrast-vs-separation curve,
// modeling the counts as a truncated Gaussian. Both parameters are positive
// by construction; results driven to ~0 are flagged at_boundary rather than
// reported as confident zeros.
struct NbarSigmanOptions {
  std::optional<double> initial_n_bar;
  std::optional<double> initial_sigma_n;
  FitOptions options;
};

inline FitResult fit_nbar_sigman(const DecoherenceCurve& curve,
                                 const NbarSigmanOptions& opts = {}) {
  curve.validate();
  const auto pts = detail::sorted_by_separation(curve);
  bool any_positive_d = false;
  for (const auto& p : pts) any_positive_d |= p.d_over_lambda > 0.0;
  if (!any_positive_d)
    throw std::invalid_argument("fit_nbar_sigman: all separations are zero");

  double c_min = 1.0;
  for (const auto& p : pts) c_min = std::min(c_min, std::max(p.contrast, 0.0));
  const double nbar_seed = opts.initial_n_bar.value_or(
      std::clamp(-std::log(std::max(c_min, 0.005)), 0.05, 30.0));
  const double sigma_seed =
      opts.initial_sigma_n.value_or(std::sqrt(std::max(nbar_seed, 0.25)));

  detail::ResidualFn resid = [&pts](const std::vector<double>& theta) {
    // an exploratory step to absurd counts would allocate absurd tables;
    // report it as an un-improvable point instead
    if (!(theta[0] < 1e4) || !(theta[1] < 1e4))
      return std::vector<double>(pts.size(), 1e150);
    const auto pn = truncated_gaussian_pn(theta[0], theta[1]);
    std::vector<double> r(pts.size());
    for (std::size_t i = 0; i < pts.size(); ++i) {
      const double model =
          std::abs(beta_total(pn, beta_single_closed_form(pts[i].d_over_lambda)));
      r[i] = (model - pts[i].contrast) / pts[i].contrast_err;
    }
    return r;
  };

  FitResult out = detail::fit_positive_model(
      {"n_bar", "sigma_n"}, {nbar_seed, sigma_seed}, resid, pts.size(), opts.options);
  out.at_boundary = out.parameters[0] < 1e-3 || out.parameters[1] < 1e-3;
  return out;
}

// Gaussian-contrast model C(d) = C0 exp(-kappa'^2 (k0 d)^2 / 2). C0 is held
// at 1 unless fit_overall_contrast asks for it as a second parameter.
struct KappaPrimeOptions {
  bool fit_overall_contrast = false;
  std::optional<double> initial_kappa_prime;
  FitOptions options;
};

inline FitResult fit_kappa_prime(const DecoherenceCurve& curve,
                                 const KappaPrimeOptions& opts = {}) {
  curve.validate();
  const auto pts = detail::sorted_by_separation(curve);
  bool any_positive_d = false;
  for (const auto& p : pts) any_positive_d |= p.d_over_lambda > 0.0;
  if (!any_positive_d)
    throw std::invalid_argument("fit_kappa_prime: all separations are zero");

  // seed from a rough log-linear regression, ln C = a - kappa'^2 x^2 / 2
  double sz = 0, szz = 0, sy = 0, szy = 0, n = 0;
  for (const auto& p : pts) {
    if (!(p.contrast > 1e-6)) continue;
    const double z = 0.5 * std::pow(two_pi * p.d_over_lambda, 2);
    const double y = std::log(p.contrast);
    sz += z; szz += z * z; sy += y; szy += z * y; n += 1;
  }
  double kp_seed = 1.0;
  if (n >= 2 && szz * n - sz * sz > 1e-12) {
    const double slope = (szy * n - sz * sy) / (szz * n - sz * sz);
    kp_seed = std::sqrt(std::clamp(-slope, 1e-4, 1e4));
  }
  if (opts.initial_kappa_prime) kp_seed = *opts.initial_kappa_prime;

  const bool with_c0 = opts.fit_overall_contrast;
  detail::ResidualFn resid = [&pts, with_c0](const std::vector<double>& theta) {
    const double kp = theta[0];
    const double c0 = with_c0 ? theta[1] : 1.0;
    std::vector<double> r(pts.size());
    for (std::size_t i = 0; i < pts.size(); ++i) {
      const double x = two_pi * pts[i].d_over_lambda;
      const double model = c0 * std::exp(-0.5 * kp * kp * x * x);
      r[i] = (model - pts[i].contrast) / pts[i].contrast_err;
    }
    return r;
  };

  std::vector<std::string> names = {"kappa_prime"};
  std::vector<double> seed = {kp_seed};
  if (with_c0) {
    names.push_back("overall_contrast");
    seed.push_back(1.0);
  }
  FitResult out =
      detail::fit_positive_model(names, seed, resid, pts.size(), opts.options);
  out.at_boundary = out.parameters[0] < 1e-3;
  return out;
}

// Remove 2*pi jumps from a d-ordered sequence of phases. Assumes the true
// phase moves by less than pi between neighbouring points; denser grids, not
// cleverness, are the fix when that fails.
inline std::vector<double> unwrap_phases(const std::vector<double>& wrapped) {
  std::vector<double> out(wrapped.size());
  if (wrapped.empty()) return out;
  out[0] = wrapped[0];
  for (std::size_t i = 1; i < wrapped.size(); ++i) {
    double step = wrapped[i] - out[i - 1];
    step -= two_pi * std::round(step / two_pi);
    out[i] = out[i - 1] + step;
  }
  return out;
}

// Weighted linear fit of unwrapped phase against k0*d. The slope is the mean
// momentum transfer in k0 units (negative under the exp(-i dk d) convention);
// points without phase data are ignored.
inline FitResult fit_phase_slope(const DecoherenceCurve& curve) {
  const auto pts = detail::sorted_by_separation(curve);
  std::vector<double> xs, ph, sig;
  for (const auto& p : pts) {
    if (!p.phase) continue;
    xs.push_back(two_pi * p.d_over_lambda);
    ph.push_back(*p.phase);
    sig.push_back(p.phase_err && *p.phase_err > 0 ? *p.phase_err : 1.0);
  }
  if (xs.size() < 2)
    throw std::invalid_argument("fit_phase_slope: need at least 2 phase points");

  const auto u = unwrap_phases(ph);
  double sw = 0, swx = 0, swxx = 0, swy = 0, swxy = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double w = 1.0 / (sig[i] * sig[i]);
    sw += w; swx += w * xs[i]; swxx += w * xs[i] * xs[i];
    swy += w * u[i]; swxy += w * xs[i] * u[i];
  }
  const double det = sw * swxx - swx * swx;
  if (std::abs(det) < 1e-300)
    throw std::invalid_argument("fit_phase_slope: separations are degenerate");
  const double slope = (sw * swxy - swx * swy) / det;
  const double intercept = (swxx * swy - swx * swxy) / det;

  double chi2 = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double r = (intercept + slope * xs[i] - u[i]) / sig[i];
    chi2 += r * r;
  }

  FitResult out;
  out.parameter_names = {"slope_k0", "intercept_rad"};
  out.parameters = {slope, intercept};
  // covariance of (slope, intercept) from the weighted normal equations
  out.covariance = {sw / det, -swx / det, -swx / det, swxx / det};
  out.standard_errors = {std::sqrt(sw / det), std::sqrt(swxx / det)};
  const std::size_t dof = xs.size() > 2 ? xs.size() - 2 : 1;
  out.chi2_per_dof = chi2 / double(dof);
  out.converged = true;
  out.iterations = 1;
  return out;
}

}  // namespace decolab
