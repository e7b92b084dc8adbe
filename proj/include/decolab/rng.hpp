#pragma once

#include <cmath>
#include <cstdint>

namespace decolab {

// splitmix64: a small counter-style generator with a strong finalizer. Used
// directly as the stream generator and, via substream(), to derive an
// independent generator per item so that ensemble results do not depend on
// how work is divided among threads. Sampling helpers are written out here
// instead of using <random> distributions because the standard does not pin
// their algorithms down and results must be reproducible across platforms.
struct SplitMix64 {
  std::uint64_t state;

  constexpr explicit SplitMix64(std::uint64_t seed) : state(seed) {}

  constexpr std::uint64_t next() {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  // uniform in [0, 1), 53 random bits
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  // uniform in (0, 1]; safe under log()
  double uniform_pos() { return static_cast<double>((next() >> 11) + 1) * 0x1.0p-53; }

  double exponential() { return -std::log(uniform_pos()); }

  // standard normal, Box-Muller (one of the pair is discarded; throughput is
  // irrelevant next to determinism here)
  double normal() {
    const double r = std::sqrt(2.0 * exponential());
    const double theta = 6.283185307179586476925286766559 * uniform();
    return r * std::cos(theta);
  }
};

inline constexpr std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Decorrelated per-item generator under a master seed. Two different
// (seed, index) pairs give streams with no detectable correlation; the same
// pair always gives the same stream.
inline SplitMix64 substream(std::uint64_t seed, std::uint64_t index) {
  return SplitMix64(mix64(seed + 0x9e3779b97f4a7c15ULL * (index + 1)));
}

}  // namespace decolab
