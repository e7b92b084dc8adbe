#pragma once

#include <cmath>
#include <cstddef>
#include <optional>
#include <stdexcept>
#include <vector>

namespace decolab {

// One measured (or synthesized) interference point: fringe contrast, and
// optionally fringe phase, versus arm separation.
struct CurvePoint {
  double d_over_lambda = 0.0;
  double contrast = 0.0;
  double contrast_err = 0.0;
  std::optional<double> phase;      // radians
  std::optional<double> phase_err;  // radians
};

struct DecoherenceCurve {
  std::vector<CurvePoint> points;

  std::size_t phase_point_count() const {
    std::size_t n = 0;
    for (const auto& p : points)
      if (p.phase) ++n;
    return n;
  }

  // Contrast slightly above 1 is tolerated: noisy data may overshoot.
  void validate() const {
    if (points.size() < 3)
      throw std::invalid_argument("curve: need at least 3 points");
    for (const auto& p : points) {
      if (!(p.d_over_lambda >= 0.0))
        throw std::invalid_argument("curve: separations must be non-negative");
      if (!std::isfinite(p.contrast))
        throw std::invalid_argument("curve: non-finite contrast");
      if (!(p.contrast_err > 0.0))
        throw std::invalid_argument("curve: contrast uncertainties must be positive");
    }
  }
};

}  // namespace decolab
