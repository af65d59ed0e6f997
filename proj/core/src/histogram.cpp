#include "roughflow/histogram.hpp"

#include <cmath>

#include "roughflow/errors.hpp"

namespace roughflow::particles {

Histogram density_histogram(const ParticleEnsemble& ensemble, const fpe::GridSpec& grid) {
  if (grid.d != ensemble.d) throw GridMismatch("histogram grid dimension differs from ensemble");
  Histogram out;
  out.density = fpe::GridFunction(grid, ensemble.time);
  const int n = grid.cells_per_dim();
  const double h = grid.spacing;
  const double inv_volume = 1.0 / std::pow(h, grid.d);

  for (std::int64_t p = 0; p < ensemble.count(); ++p) {
    const double* x = ensemble.position(p);
    int idx[3] = {0, 0, 0};
    bool inside = true;
    for (int k = 0; k < grid.d; ++k) {
      double rel = (x[k] - grid.lo(k)) / h;
      int i = static_cast<int>(std::floor(rel));
      if (i < 0 || i >= n) {
        inside = false;
        break;
      }
      idx[k] = i;
    }
    double w = ensemble.weights[static_cast<size_t>(p)];
    if (inside) {
      out.density.values[static_cast<size_t>(grid.flatten(idx))] += w * inv_volume;
    } else {
      out.overflow_weight += w;
    }
  }
  return out;
}

}  // namespace roughflow::particles
