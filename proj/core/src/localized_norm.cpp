#include "roughflow/localized_norm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "roughflow/errors.hpp"
#include "roughflow/ramps.hpp"

namespace roughflow::fields {

namespace {

struct Box {
  int lo[3];
  int hi[3];  // exclusive
};

}  // namespace

double localized_norm(const std::function<double(double, const double*)>& f,
                      double p, double q, double radius, double horizon,
                      const fpe::GridSpec& grid, int time_samples) {
  if (!(p >= 1.0) || !(q >= 1.0)) throw ParameterGateViolation("exponents must satisfy p, q >= 1");
  if (!(radius > 0.0)) throw ParameterGateViolation("localization radius must be positive");
  if (!(horizon > 0.0) || time_samples < 1) throw ParameterGateViolation("need a positive time window");

  const int d = grid.d;
  const int n = grid.cells_per_dim();
  const int64_t cells = grid.cell_count();
  const double h = grid.spacing;
  const double cell_volume = std::pow(h, d);
  const double dt = horizon / time_samples;

  // Sample |f|^p once per (time, cell).
  std::vector<double> powers(static_cast<size_t>(time_samples) * cells);
  bool finite = true;
  for (int m = 0; m < time_samples; ++m) {
    double t = (m + 0.5) * dt;
    for (int64_t c = 0; c < cells; ++c) {
      int idx[3];
      grid.unflatten(c, idx);
      double x[3] = {0.0, 0.0, 0.0};
      for (int k = 0; k < d; ++k) x[k] = grid.coord(k, idx[k]);
      double v = f(t, x);
      if (!std::isfinite(v)) finite = false;
      powers[static_cast<size_t>(m) * cells + c] = std::pow(std::fabs(v), p);
    }
  }
  if (!finite) return std::numeric_limits<double>::infinity();

  double best = 0.0;
  std::vector<double> weights;
  int64_t j_lo[3] = {0, 0, 0};
  int64_t span[3] = {1, 1, 1};
  int64_t lattice_count = 1;
  for (int k = 0; k < d; ++k) {
    j_lo[k] = static_cast<int64_t>(std::ceil(grid.lo(k) / radius));
    int64_t j_hi = static_cast<int64_t>(std::floor(grid.hi(k) / radius));
    if (j_lo[k] > j_hi) return 0.0;
    span[k] = j_hi - j_lo[k] + 1;
    lattice_count *= span[k];
  }

  for (int64_t li = 0; li < lattice_count; ++li) {
    double y[3] = {0.0, 0.0, 0.0};
    int64_t rest = li;
    for (int k = 0; k < d; ++k) {
      y[k] = static_cast<double>(j_lo[k] + rest % span[k]) * radius;
      rest /= span[k];
    }

    // Cells possibly inside the support |x - y| <= 2r.
    Box box;
    bool empty = false;
    int64_t box_cells = 1;
    for (int k = 0; k < d; ++k) {
      double lo_x = y[k] - 2.0 * radius;
      double hi_x = y[k] + 2.0 * radius;
      int lo_i = std::max(0, static_cast<int>(std::floor((lo_x - grid.lo(k)) / h)));
      int hi_i = std::min(n, static_cast<int>(std::ceil((hi_x - grid.lo(k)) / h)) + 1);
      if (lo_i >= hi_i) empty = true;
      box.lo[k] = lo_i;
      box.hi[k] = hi_i;
      box_cells *= std::max(0, hi_i - lo_i);
    }
    if (empty) continue;

    // chi^p per cell of the sub-box, reused across time samples.
    weights.assign(static_cast<size_t>(box_cells), 0.0);
    bool any = false;
    for (int64_t bc = 0; bc < box_cells; ++bc) {
      int64_t rest_b = bc;
      double dist2 = 0.0;
      int idx[3] = {0, 0, 0};
      for (int k = 0; k < d; ++k) {
        int span = box.hi[k] - box.lo[k];
        idx[k] = box.lo[k] + static_cast<int>(rest_b % span);
        rest_b /= span;
        double dx = grid.coord(k, idx[k]) - y[k];
        dist2 += dx * dx;
      }
      double chi = cutoff_chi(std::sqrt(dist2) / radius);
      if (chi > 0.0) {
        weights[static_cast<size_t>(bc)] = std::pow(chi, p);
        any = true;
      }
    }
    if (!any) continue;

    double time_accum = 0.0;
    for (int m = 0; m < time_samples; ++m) {
      const double* slab = powers.data() + static_cast<size_t>(m) * cells;
      double space_accum = 0.0;
      for (int64_t bc = 0; bc < box_cells; ++bc) {
        double w = weights[static_cast<size_t>(bc)];
        if (w == 0.0) continue;
        int64_t rest_b = bc;
        int idx[3] = {0, 0, 0};
        for (int k = 0; k < d; ++k) {
          int span = box.hi[k] - box.lo[k];
          idx[k] = box.lo[k] + static_cast<int>(rest_b % span);
          rest_b /= span;
        }
        space_accum += w * slab[grid.flatten(idx)];
      }
      double space_norm = std::pow(space_accum * cell_volume, 1.0 / p);
      time_accum += std::pow(space_norm, q) * dt;
    }
    best = std::max(best, std::pow(time_accum, 1.0 / q));
  }
  return best;
}

}  // namespace roughflow::fields
