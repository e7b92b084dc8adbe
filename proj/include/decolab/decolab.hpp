#pragma once

// Umbrella header: photon-scattering decoherence in an atom interferometer,
// from the single-photon decoherence function through photon-count
// statistics, ensemble composition, the equivalent master-equation picture,
// Monte Carlo sampling, and parameter extraction from measured curves.

#include "decolab/units.hpp"
#include "decolab/quadrature.hpp"
#include "decolab/emission.hpp"
#include "decolab/geometry.hpp"
#include "decolab/single_photon.hpp"
#include "decolab/rng.hpp"
#include "decolab/parallel.hpp"
#include "decolab/photon_statistics.hpp"
#include "decolab/composition.hpp"
#include "decolab/master_equation.hpp"
#include "decolab/montecarlo.hpp"
#include "decolab/curve.hpp"
#include "decolab/curve_io.hpp"
#include "decolab/fitting.hpp"
