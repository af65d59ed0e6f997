#pragma once

#include "roughflow/ensemble.hpp"
#include "roughflow/grid.hpp"

namespace roughflow::particles {

/// Cell histogram of an ensemble: weighted counts scaled by h^-d, so the
/// result is a density whose grid mass plus the overflow weight is the total
/// particle weight.
struct Histogram {
  fpe::GridFunction density;
  double overflow_weight = 0.0;  // weight of particles outside the box
};

Histogram density_histogram(const ParticleEnsemble& ensemble, const fpe::GridSpec& grid);

}  // namespace roughflow::particles
