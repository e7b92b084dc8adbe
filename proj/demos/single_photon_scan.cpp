// Scans the single-photon decoherence function and prints the contrast dip
// and revival region. Build target: demo_single_photon_scan.

#include <cstdio>

#include "decolab/decolab.hpp"

int main() {
  std::printf("# d/lambda  |beta|      phase/rad\n");
  for (int i = 0; i <= 50; ++i) {
    const double d = 1.0 * i / 50.0;
    const auto b = decolab::beta_single(d);
    std::printf("%8.3f  %9.6f  %9.6f\n", d, std::abs(b), std::arg(b));
  }

  // locate the contrast zero by bisecting the oscillatory envelope
  double lo = 0.3, hi = 0.5;
  auto envelope = [](double d) {
    const auto b = decolab::beta_single_closed_form(d);
    const double x = decolab::two_pi * d;
    return b.real() * std::cos(x) - b.imag() * std::sin(x);
  };
  for (int i = 0; i < 60; ++i) {
    const double mid = 0.5 * (lo + hi);
    (envelope(lo) * envelope(mid) <= 0 ? hi : lo) = mid;
  }
  std::printf("\nfirst contrast zero at d/lambda = %.6f\n", 0.5 * (lo + hi));
  return 0;
}
