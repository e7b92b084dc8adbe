#pragma once

#include <algorithm>
#include <stdexcept>

namespace decolab {

// Three-grating Mach-Zehnder layout. The two arms separate linearly behind
// the first grating at the diffraction angle, reach their maximum just before
// the second grating, and close again at the third. A resonant laser beam
// crossing the interferometer at longitudinal position z sees the arms a
// transverse distance apart given by separation_at_laser.
struct InterferometerGeometry {
  double diffraction_angle_rad = 2.0e-5;
  double grating1_z_m = 0.0;
  double grating2_z_m = 0.66;
  // Separation stops growing once the arms pass the second grating; the
  // clamp also lets tests pin a maximum directly.
  double max_separation_m = 2.0e-5 * 0.66;

  void validate() const {
    if (!(diffraction_angle_rad > 0))
      throw std::invalid_argument("geometry: diffraction angle must be positive");
    if (!(grating2_z_m > grating1_z_m))
      throw std::invalid_argument("geometry: gratings out of order");
    if (!(max_separation_m > 0))
      throw std::invalid_argument("geometry: max separation must be positive");
  }
};

// Arm separation (metres) at laser position z. Monotone non-decreasing in z
// over the allowed range [grating1_z, grating2_z].
inline double separation_at_laser(const InterferometerGeometry& g, double laser_z_m) {
  g.validate();
  if (laser_z_m < g.grating1_z_m || laser_z_m > g.grating2_z_m)
    throw std::domain_error("geometry: laser position outside the interferometer");
  const double d = g.diffraction_angle_rad * (laser_z_m - g.grating1_z_m);
  return std::min(d, g.max_separation_m);
}

}  // namespace decolab
