#pragma once

#include <atomic>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <vector>

#include "decolab/parallel.hpp"
#include "decolab/quadrature.hpp"
#include "decolab/rng.hpp"

namespace decolab {

// Distribution of the number of photons an atom scatters during one transit,
// stored as weights[n] = P(n) for n = 0..N. Truncation keeps the neglected
// tail mass below tail_mass_bound.
struct PhotonNumberDistribution {
  std::vector<double> weights;

  static constexpr double tail_mass_bound = 1e-12;

  std::size_t max_count() const {
    return weights.empty() ? 0 : weights.size() - 1;
  }

  double total() const {
    double s = 0;
    for (double w : weights) s += w;
    return s;
  }

  double mean() const {
    double s = 0;
    for (std::size_t n = 0; n < weights.size(); ++n) s += double(n) * weights[n];
    return s / total();
  }

  double variance() const {
    const double mu = mean();
    double s = 0;
    for (std::size_t n = 0; n < weights.size(); ++n)
      s += (double(n) - mu) * (double(n) - mu) * weights[n];
    return s / total();
  }

  void validate() const {
    if (weights.empty())
      throw std::invalid_argument("photon counts: empty distribution");
    double s = 0;
    for (double w : weights) {
      if (!(w >= 0.0))  // also rejects NaN
        throw std::invalid_argument("photon counts: negative or non-finite weight");
      s += w;
    }
    if (std::abs(s - 1.0) > 1e-9)
      throw std::invalid_argument("photon counts: weights do not sum to 1");
  }

  std::vector<double> cumulative() const {
    std::vector<double> cdf(weights.size());
    double s = 0;
    for (std::size_t n = 0; n < weights.size(); ++n) cdf[n] = (s += weights[n]);
    return cdf;
  }
};

// Hard cap on the stored count range, well beyond any mass the tail rule
// keeps; guards pathological parameter combinations only.
inline std::size_t truncation_cap(double n_bar, double sigma_n) {
  return static_cast<std::size_t>(10.0 * (n_bar + 5.0 * sigma_n + 10.0));
}

// Poisson counts, truncated where the remaining tail (bounded by a geometric
// series once the term ratio drops below 1) is under tail_mass_bound. Weights
// are the exact Poisson masses, not renormalized; the deficit is the
// truncated tail itself.
inline PhotonNumberDistribution poisson_pn(double n_bar) {
  if (!(n_bar >= 0.0))
    throw std::invalid_argument("poisson_pn: mean must be non-negative");
  if (n_bar == 0.0) return {{1.0}};
  const std::size_t cap = truncation_cap(n_bar, std::sqrt(n_bar));
  std::vector<double> w;
  w.reserve(static_cast<std::size_t>(n_bar + 10 * std::sqrt(n_bar) + 16));
  for (std::size_t n = 0; n <= cap; ++n) {
    const double logw = -n_bar + double(n) * std::log(n_bar) - std::lgamma(double(n) + 1.0);
    w.push_back(std::exp(logw));
    const double r = n_bar / double(n + 1);
    if (double(n) >= n_bar && r < 1.0 &&
        w.back() * r / (1.0 - r) < PhotonNumberDistribution::tail_mass_bound)
      break;
  }
  return {std::move(w)};
}

// Discrete Gaussian over n >= 0, renormalized after truncation. For small
// n_bar/sigma_n the cut at n = 0 shifts the realized mean above n_bar; that
// shift is physical to the model, so mean() reports the realized value.
inline PhotonNumberDistribution truncated_gaussian_pn(double n_bar, double sigma_n) {
  if (!(n_bar >= 0.0))
    throw std::invalid_argument("truncated_gaussian_pn: mean must be non-negative");
  if (!(sigma_n > 0.0))
    throw std::invalid_argument("truncated_gaussian_pn: width must be positive");
  const std::size_t cap = truncation_cap(n_bar, sigma_n);
  const double inv2s2 = 1.0 / (2.0 * sigma_n * sigma_n);
  // log weights relative to the lattice mode, so exp() never overflows
  const double mode = std::max(0.0, std::round(n_bar));
  std::vector<double> w;
  double total = 0;
  for (std::size_t n = 0; n <= cap; ++n) {
    const double dn = double(n) - n_bar;
    const double logw = (mode - n_bar) * (mode - n_bar) * inv2s2 - dn * dn * inv2s2;
    w.push_back(std::exp(logw));
    total += w.back();
    // geometric tail bound: successive ratios shrink monotonically past n_bar
    if (double(n) > n_bar) {
      const double r = std::exp(-(2.0 * (double(n) - n_bar) + 1.0) * inv2s2);
      if (r < 1.0 &&
          w.back() * r / (1.0 - r) < PhotonNumberDistribution::tail_mass_bound * total)
        break;
    }
  }
  for (double& x : w) x /= total;
  return {std::move(w)};
}

// Exactly n photons.
inline PhotonNumberDistribution delta_pn(std::size_t n) {
  std::vector<double> w(n + 1, 0.0);
  w[n] = 1.0;
  return {std::move(w)};
}

// Resonant laser beam crossed by the atom in time transit_time. The shape
// g(t) in [0, 1] is the intensity profile relative to its peak; the photon
// scattering rate saturates with intensity, so at peak saturation parameter
// s the rate relative to ITS peak is
//   R(g) = g (1 + s) / (1 + s g),
// which reduces to R = g for s -> 0 and flattens toward 1 for strong beams.
struct BeamProfile {
  double peak_scattering_rate = 0.0;           // events per unit time at beam center
  double transit_time = 0.0;
  std::function<double(double)> profile_shape;  // t in [0, transit_time] -> [0, 1]
  double saturation_s = 0.0;

  double relative_rate(double g) const {
    if (saturation_s <= 0.0) return g;
    return g * (1.0 + saturation_s) / (1.0 + saturation_s * g);
  }

  double rate(double t) const { return peak_scattering_rate * relative_rate(profile_shape(t)); }

  void validate() const {
    if (!(peak_scattering_rate >= 0.0))
      throw std::invalid_argument("beam: peak rate must be non-negative");
    if (!(transit_time > 0.0))
      throw std::invalid_argument("beam: transit time must be positive");
    if (!profile_shape) throw std::invalid_argument("beam: missing profile shape");
  }

  // Mean number of scattered photons per transit.
  double expected_photons() const {
    validate();
    if (peak_scattering_rate == 0.0) return 0.0;
    const double integral = integrate(
        [this](double t) { return relative_rate(profile_shape(t)); }, 0.0,
        transit_time, 1e-10 * std::max(1.0, transit_time));
    return peak_scattering_rate * integral;
  }

  static BeamProfile flat(double peak_rate, double transit_time, double s = 0.0) {
    return {peak_rate, transit_time, [](double) { return 1.0; }, s};
  }

  // Gaussian intensity profile centered in the transit window, width chosen
  // so the window covers +-3 standard deviations.
  static BeamProfile gaussian(double peak_rate, double transit_time, double s = 0.0) {
    const double t0 = 0.5 * transit_time;
    const double sig = transit_time / 6.0;
    return {peak_rate, transit_time,
            [t0, sig](double t) {
              const double z = (t - t0) / sig;
              return std::exp(-0.5 * z * z);
            },
            s};
  }

  // Same beam with the peak rate rescaled so expected_photons() == n_bar.
  // Shape and saturation parameter are held fixed, so the yield is linear in
  // the peak rate and the rescaling is exact.
  BeamProfile scaled_to(double n_bar) const {
    validate();
    if (!(n_bar >= 0.0))
      throw std::invalid_argument("beam: target mean must be non-negative");
    BeamProfile out = *this;
    if (n_bar == 0.0) {
      out.peak_scattering_rate = 0.0;
      return out;
    }
    out.peak_scattering_rate = 1.0;
    const double yield_at_unit = out.expected_photons();
    if (!(yield_at_unit > 0.0))
      throw std::invalid_argument("beam: profile has zero integral");
    out.peak_scattering_rate = n_bar / yield_at_unit;  // exact: yield is linear in peak rate
    return out;
  }
};

// Empirical photon-count distribution from sampled beam transits. Events are
// generated by thinning a homogeneous process at the peak rate, so no
// integral of the profile is needed and any bounded shape works. Per-sample
// generator substreams plus fixed-size blocks merged in index order make the
// histogram bit-identical for any worker count.
inline PhotonNumberDistribution simulate_pn_beam(const BeamProfile& beam,
                                                 std::size_t samples,
                                                 std::uint64_t seed) {
  beam.validate();
  if (samples == 0)
    throw std::invalid_argument("simulate_pn_beam: need at least one sample");

  const double rate = beam.peak_scattering_rate;
  const double tau = beam.transit_time;
  if (rate == 0.0) return {{1.0}};

  const std::size_t n_blocks =
      (samples + default_block_size - 1) / default_block_size;
  std::vector<std::vector<std::uint64_t>> block_hist(n_blocks);
  std::atomic<bool> bad_shape{false};

  for_each_block(samples, [&](std::size_t b, std::size_t begin, std::size_t end) {
    auto& hist = block_hist[b];
    for (std::size_t i = begin; i < end; ++i) {
      SplitMix64 rng = substream(seed, i);
      std::size_t n = 0;
      double t = rng.exponential() / rate;
      while (t < tau) {
        const double g = beam.profile_shape(t);
        if (!(g >= 0.0 && g <= 1.0)) bad_shape.store(true, std::memory_order_relaxed);
        if (rng.uniform() < beam.relative_rate(std::min(std::max(g, 0.0), 1.0))) ++n;
        t += rng.exponential() / rate;
      }
      if (n >= hist.size()) hist.resize(n + 1, 0);
      ++hist[n];
    }
  });

  if (bad_shape.load())
    throw std::invalid_argument("simulate_pn_beam: profile_shape must lie in [0, 1]");

  std::size_t max_n = 0;
  for (const auto& h : block_hist) max_n = std::max(max_n, h.size());
  std::vector<std::uint64_t> counts(std::max<std::size_t>(max_n, 1), 0);
  for (const auto& h : block_hist)
    for (std::size_t n = 0; n < h.size(); ++n) counts[n] += h[n];

  std::vector<double> w(counts.size());
  for (std::size_t n = 0; n < counts.size(); ++n)
    w[n] = static_cast<double>(counts[n]) / static_cast<double>(samples);
  return {std::move(w)};
}

// Beam-averaged observables of the scattered ensemble, in k0 units: the mean
// longitudinal deflection is one recoil per scattered photon, and the spread
// combines per-photon emission randomness with the count spread,
//   broadening^2 = sigma_k^2 * <n> + Var(n) * k0^2,
// with sigma_k^2 = 2/5 for the dipole marginal. Moments are the realized
// moments of the (possibly truncated) distribution.
struct BeamObservables {
  double deflection_k0 = 0.0;
  double broadening_k0 = 0.0;
};

inline BeamObservables beam_observables(const PhotonNumberDistribution& pn,
                                        double sigma_k_squared = 0.4) {
  pn.validate();
  const double mu = pn.mean();
  const double var = pn.variance();
  return {mu, std::sqrt(sigma_k_squared * mu + var)};
}

}  // namespace decolab
