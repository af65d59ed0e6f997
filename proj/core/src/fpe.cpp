#include "roughflow/fpe.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "roughflow/errors.hpp"
#include "roughflow/parallel.hpp"

namespace roughflow::fpe {

FvScheme::FvScheme(const fields::CoefficientField& field, const GridSpec& grid)
    : field_(&field), grid_(grid), n_(grid.cells_per_dim()), cells_(grid.cell_count()) {
  if (n_ < 2) throw GridMismatch("grid needs at least two cells per axis");
  if (field.d != grid.d) throw GridMismatch("field and grid dimensions differ");
}

void FvScheme::prepare(double t) {
  if (built_ && (field_->autonomous || t == prepared_time_)) return;
  build(t);
  prepared_time_ = t;
  built_ = true;
}

void FvScheme::build(double t) {
  const int d = grid_.d;
  const double h = grid_.spacing;
  const double cap = 1.0 / h;
  const bool has_locus = field_->locus.kind != fields::SingularLocus::Kind::none;

  for (int k = 0; k < d; ++k) {
    diff_[k].assign(static_cast<size_t>(cells_), 0.0);
    vp_[k].assign(static_cast<size_t>(cells_), 0.0);
    vm_[k].assign(static_cast<size_t>(cells_), 0.0);
  }
  dcoef_.assign(static_cast<size_t>(cells_), 0.0);
  bdry_cell_.clear();
  bdry_vout_.clear();

  // Cell-centered diffusion samples; faces take the arithmetic mean.
  std::vector<double> a_cell;
  double a_const = 0.0;
  if (field_->constant_diffusion) {
    double origin[3] = {grid_.coord(0, 0), d > 1 ? grid_.coord(1, 0) : 0.0,
                        d > 2 ? grid_.coord(2, 0) : 0.0};
    a_const = field_->diffusion(t, origin);
  } else {
    a_cell.resize(static_cast<size_t>(cells_));
    for (std::int64_t c = 0; c < cells_; ++c) {
      int idx[3];
      grid_.unflatten(c, idx);
      double x[3] = {0.0, 0.0, 0.0};
      for (int k = 0; k < d; ++k) x[k] = grid_.coord(k, idx[k]);
      a_cell[static_cast<size_t>(c)] = field_->diffusion(t, x);
    }
  }

  double max_speed = 0.0;
  for (int k = 0; k < d; ++k) {
    const std::int64_t s = grid_.stride(k);
    for (std::int64_t c = 0; c < cells_; ++c) {
      int idx[3];
      grid_.unflatten(c, idx);
      if (idx[k] >= n_ - 1) continue;
      double xf[3] = {0.0, 0.0, 0.0};
      for (int j = 0; j < d; ++j) xf[j] = grid_.coord(j, idx[j]);
      xf[k] = grid_.lo(k) + static_cast<double>(idx[k] + 1) * h;

      double vel[3] = {0.0, 0.0, 0.0};
      field_->advective(t, xf, vel);
      double v = vel[k];
      if (!std::isfinite(v)) v = 0.0;
      if (has_locus && field_->locus.distance(xf, d) < h) {
        double mag = std::min(std::fabs(v), cap);
        v = std::copysign(mag, v);
      }
      max_speed = std::max(max_speed, std::fabs(v));

      double a_face;
      if (field_->constant_diffusion) {
        a_face = a_const;
      } else {
        a_face = 0.5 * (a_cell[static_cast<size_t>(c)] + a_cell[static_cast<size_t>(c + s)]);
      }

      diff_[k][static_cast<size_t>(c)] = a_face / (h * h);
      vp_[k][static_cast<size_t>(c)] = std::max(v, 0.0) / h;
      vm_[k][static_cast<size_t>(c)] = std::min(v, 0.0) / h;
    }
  }

  // Total outflow coefficient: right faces lose diff + vp, left faces lose
  // diff - vm. Matches the neighbor-inflow terms exactly, so column sums of
  // the step matrix are one.
  double max_d = 0.0;
  for (std::int64_t c = 0; c < cells_; ++c) {
    int idx[3];
    grid_.unflatten(c, idx);
    double total = 0.0;
    for (int k = 0; k < d; ++k) {
      const std::int64_t s = grid_.stride(k);
      if (idx[k] < n_ - 1) {
        total += diff_[k][static_cast<size_t>(c)] + vp_[k][static_cast<size_t>(c)];
      }
      if (idx[k] > 0) {
        total += diff_[k][static_cast<size_t>(c - s)] - vm_[k][static_cast<size_t>(c - s)];
      }
    }
    dcoef_[static_cast<size_t>(c)] = total;
    max_d = std::max(max_d, total);
  }

  // Suppressed-outflow monitor: outward advective speed at closed faces.
  for (std::int64_t c = 0; c < cells_; ++c) {
    int idx[3];
    grid_.unflatten(c, idx);
    for (int k = 0; k < d; ++k) {
      for (int side = 0; side < 2; ++side) {
        if ((side == 0 && idx[k] != 0) || (side == 1 && idx[k] != n_ - 1)) continue;
        double xf[3] = {0.0, 0.0, 0.0};
        for (int j = 0; j < d; ++j) xf[j] = grid_.coord(j, idx[j]);
        xf[k] = side == 0 ? grid_.lo(k) : grid_.hi(k);
        double vel[3] = {0.0, 0.0, 0.0};
        field_->advective(t, xf, vel);
        double v = vel[k];
        if (!std::isfinite(v)) v = 0.0;
        double vout = side == 0 ? std::max(-v, 0.0) : std::max(v, 0.0);
        if (vout > 0.0) {
          bdry_cell_.push_back(c);
          bdry_vout_.push_back(vout);
        }
      }
    }
  }

  const double lambda = std::max(field_->ellipticity, 1.0);
  const double h2_bound = h * h / (2.0 * d * lambda);
  double formula = 0.9 * h2_bound;
  if (max_speed > 0.0) formula = std::min(formula, 0.9 * h / max_speed);
  bounds_.dt_formula = formula;
  bounds_.dt_monotone = max_d > 0.0 ? 1.0 / max_d : std::numeric_limits<double>::infinity();
  bounds_.max_speed = max_speed;
}

double FvScheme::resolve_dt(double requested) const {
  const double limit = bounds_.admissible();
  if (requested <= 0.0) return limit;
  if (requested > limit * (1.0 + 1e-12)) {
    throw CflViolation("explicit step " + std::to_string(requested) +
                       " exceeds the stability bound " + std::to_string(limit));
  }
  return requested;
}

void FvScheme::fpe_step(const std::vector<double>& in, std::vector<double>& out, double dt,
                        int threads) const {
  out.resize(in.size());
  const int d = grid_.d;
  const double* u = in.data();
  double* w = out.data();
  std::int64_t strides[3] = {1, 1, 1};
  for (int k = 0; k < d; ++k) strides[k] = grid_.stride(k);

  parallel_for(cells_, threads, [&](std::int64_t lo, std::int64_t hi) {
    int idx[3];
    for (std::int64_t c = lo; c < hi; ++c) {
      grid_.unflatten(c, idx);
      double inflow = 0.0;
      for (int k = 0; k < d; ++k) {
        const std::int64_t s = strides[k];
        if (idx[k] > 0) {
          const std::int64_t f = c - s;
          inflow += (diff_[k][static_cast<size_t>(f)] + vp_[k][static_cast<size_t>(f)]) *
                    u[f];
        }
        if (idx[k] < n_ - 1) {
          inflow += (diff_[k][static_cast<size_t>(c)] - vm_[k][static_cast<size_t>(c)]) *
                    u[c + s];
        }
      }
      w[c] = u[c] * (1.0 - dt * dcoef_[static_cast<size_t>(c)]) + dt * inflow;
    }
  });
}

void FvScheme::ke_step(const std::vector<double>& in, std::vector<double>& out, double dt,
                       int threads) const {
  out.resize(in.size());
  const int d = grid_.d;
  const double* u = in.data();
  double* w = out.data();
  std::int64_t strides[3] = {1, 1, 1};
  for (int k = 0; k < d; ++k) strides[k] = grid_.stride(k);

  parallel_for(cells_, threads, [&](std::int64_t lo, std::int64_t hi) {
    int idx[3];
    for (std::int64_t c = lo; c < hi; ++c) {
      grid_.unflatten(c, idx);
      double inflow = 0.0;
      for (int k = 0; k < d; ++k) {
        const std::int64_t s = strides[k];
        if (idx[k] < n_ - 1) {
          inflow += (diff_[k][static_cast<size_t>(c)] + vp_[k][static_cast<size_t>(c)]) *
                    u[c + s];
        }
        if (idx[k] > 0) {
          const std::int64_t f = c - s;
          inflow += (diff_[k][static_cast<size_t>(f)] - vm_[k][static_cast<size_t>(f)]) *
                    u[f];
        }
      }
      w[c] = u[c] * (1.0 - dt * dcoef_[static_cast<size_t>(c)]) + dt * inflow;
    }
  });
}

double FvScheme::boundary_outflow_rate(const std::vector<double>& u) const {
  const double area = std::pow(grid_.spacing, grid_.d - 1);
  double rate = 0.0;
  for (size_t i = 0; i < bdry_cell_.size(); ++i) {
    rate += bdry_vout_[i] * u[static_cast<size_t>(bdry_cell_[i])] * area;
  }
  return rate;
}

namespace {

double boundary_layer_mass(const GridSpec& grid, const std::vector<double>& u) {
  const int n = grid.cells_per_dim();
  const double cell_volume = std::pow(grid.spacing, grid.d);
  double mass = 0.0;
  int idx[3];
  for (std::int64_t c = 0; c < grid.cell_count(); ++c) {
    grid.unflatten(c, idx);
    bool outer = false;
    for (int k = 0; k < grid.d; ++k) {
      if (idx[k] == 0 || idx[k] == n - 1) outer = true;
    }
    if (outer) mass += u[static_cast<size_t>(c)] * cell_volume;
  }
  return mass;
}

}  // namespace

FpeResult solve_fpe(const fields::CoefficientField& field, const GridFunction& phi,
                    const GridSpec& grid, const FpeOptions& options) {
  if (!phi.grid.same_layout(grid)) throw GridMismatch("initial data lives on a different grid");
  if (!phi.all_finite()) throw NonFiniteState("initial data is not finite");
  const double horizon = grid.horizon;
  if (!(horizon > 0.0)) throw ParameterGateViolation("horizon must be positive");

  FvScheme scheme(field, grid);
  scheme.prepare(0.0);
  const double dt_bound = scheme.resolve_dt(grid.dt);
  const std::int64_t steps =
      std::max<std::int64_t>(1, static_cast<std::int64_t>(std::ceil(horizon / dt_bound - 1e-9)));
  const double dt = horizon / static_cast<double>(steps);

  // Map each requested snapshot to the nearest step boundary.
  std::vector<std::int64_t> snap_steps;
  for (double ts : options.snapshot_times) {
    if (ts < -1e-12 || ts > horizon * (1.0 + 1e-12)) {
      throw ParameterGateViolation("snapshot time outside [0, horizon]");
    }
    std::int64_t k = static_cast<std::int64_t>(std::llround(ts / dt));
    snap_steps.push_back(std::clamp<std::int64_t>(k, 0, steps));
  }
  snap_steps.push_back(steps);

  FpeResult result;
  result.dt = dt;
  result.steps = steps;

  std::vector<double> u = phi.values;
  std::vector<double> next(u.size());
  const double cell_volume = std::pow(grid.spacing, grid.d);

  auto record = [&](std::int64_t step_idx) {
    GridFunction snap(grid, static_cast<double>(step_idx) * dt);
    snap.values = u;
    double m = 0.0;
    for (double v : u) m += v;
    result.mass.push_back(m * cell_volume);
    result.boundary_layer_mass.push_back(boundary_layer_mass(grid, u));
    result.snapshots.push_back(std::move(snap));
  };

  auto sup_of = [&]() {
    double m = 0.0;
    for (double v : u) m = std::max(m, std::fabs(v));
    return m;
  };
  result.max_sup = sup_of();

  std::vector<double> source_cells;
  if (options.source) {
    source_cells.resize(static_cast<size_t>(grid.cell_count()));
  }

  size_t next_snap = 0;
  std::sort(snap_steps.begin(), snap_steps.end());
  while (next_snap < snap_steps.size() && snap_steps[next_snap] == 0) {
    record(0);
    ++next_snap;
  }

  for (std::int64_t s = 0; s < steps; ++s) {
    const double t = static_cast<double>(s) * dt;
    scheme.prepare(t);
    if (options.form == EquationForm::conservative) {
      scheme.fpe_step(u, next, dt, options.threads);
    } else {
      scheme.ke_step(u, next, dt, options.threads);
    }
    if (options.source) {
      int idx[3];
      for (std::int64_t c = 0; c < grid.cell_count(); ++c) {
        grid.unflatten(c, idx);
        double x[3] = {0.0, 0.0, 0.0};
        for (int k = 0; k < grid.d; ++k) x[k] = grid.coord(k, idx[k]);
        next[static_cast<size_t>(c)] += dt * options.source(t, x);
      }
    }
    if (options.track_boundary) {
      result.suppressed_outflow += dt * scheme.boundary_outflow_rate(u);
    }
    u.swap(next);

    result.max_sup = std::max(result.max_sup, sup_of());
    if ((s & 63) == 0 || s == steps - 1) {
      bool ok = true;
      for (double v : u) {
        if (!std::isfinite(v)) ok = false;
      }
      if (!ok) {
        throw NonFiniteState("solution lost finiteness at step " + std::to_string(s + 1));
      }
    }
    while (next_snap < snap_steps.size() && snap_steps[next_snap] == s + 1) {
      record(s + 1);
      ++next_snap;
    }
  }
  return result;
}

}  // namespace roughflow::fpe
