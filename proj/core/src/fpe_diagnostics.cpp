#include "roughflow/fpe_diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "roughflow/errors.hpp"

namespace roughflow::fpe {

namespace {

// Space-time measure helper: uniform snapshot weights over the window.
struct WindowView {
  std::vector<const GridFunction*> snaps;
  double weight = 0.0;  // time weight per snapshot
};

WindowView select_window(const std::vector<GridFunction>& solution, double t_lo, double t_hi) {
  WindowView view;
  for (const GridFunction& g : solution) {
    if (g.time >= t_lo - 1e-12 && g.time <= t_hi + 1e-12) view.snaps.push_back(&g);
  }
  if (!view.snaps.empty()) {
    double span = std::max(t_hi - t_lo, 0.0);
    view.weight = span > 0.0 ? span / static_cast<double>(view.snaps.size()) : 1.0;
  }
  return view;
}

std::vector<char> ball_mask(const GridSpec& grid, double ball_radius) {
  std::vector<char> mask(static_cast<size_t>(grid.cell_count()), 1);
  if (ball_radius <= 0.0) return mask;
  int idx[3];
  for (std::int64_t c = 0; c < grid.cell_count(); ++c) {
    grid.unflatten(c, idx);
    double r2 = 0.0;
    for (int k = 0; k < grid.d; ++k) {
      double x = grid.coord(k, idx[k]);
      r2 += x * x;
    }
    mask[static_cast<size_t>(c)] = r2 <= ball_radius * ball_radius ? 1 : 0;
  }
  return mask;
}

}  // namespace

LevelSetEnergy energy_report(const std::vector<GridFunction>& solution, double level,
                             double ball_radius, double t_lo, double t_hi) {
  if (!(t_lo <= t_hi)) throw ParameterGateViolation("window must satisfy t_lo <= t_hi");
  LevelSetEnergy out;
  out.level = level;
  WindowView view = select_window(solution, t_lo, t_hi);
  if (view.snaps.empty()) return out;

  const GridSpec& grid = view.snaps.front()->grid;
  const double cell_volume = std::pow(grid.spacing, grid.d);
  std::vector<char> mask = ball_mask(grid, ball_radius);

  for (const GridFunction* g : view.snaps) {
    if (!g->grid.same_layout(grid)) throw GridMismatch("solution snapshots on different grids");
    double l2 = 0.0;
    double measure = 0.0;
    for (std::int64_t c = 0; c < grid.cell_count(); ++c) {
      if (!mask[static_cast<size_t>(c)]) continue;
      double v = g->values[static_cast<size_t>(c)];
      if (v > level) {
        double trunc = v - level;
        out.truncation_sup = std::max(out.truncation_sup, trunc);
        l2 += trunc * trunc;
        measure += 1.0;
      }
    }
    out.truncation_l2 += l2 * cell_volume * view.weight;
    out.levelset_measure += measure * cell_volume * view.weight;
  }
  return out;
}

DeGiorgiReport degiorgi_sequence(const std::vector<GridFunction>& solution, double base_level,
                                 double multiplier, int level_count) {
  if (!(base_level > 0.0)) throw ParameterGateViolation("base level K0 must be positive");
  if (!(multiplier > 0.0)) throw ParameterGateViolation("multiplier must be positive");
  if (level_count < 1) throw ParameterGateViolation("need at least one level");

  DeGiorgiReport report;
  report.base_level = base_level;
  report.multiplier = multiplier;
  if (solution.empty()) return report;

  const GridSpec& grid = solution.front().grid;
  const double cell_volume = std::pow(grid.spacing, grid.d);
  double t_lo = solution.front().time;
  double t_hi = solution.back().time;
  double weight = solution.size() > 1 && t_hi > t_lo
                      ? (t_hi - t_lo) / static_cast<double>(solution.size())
                      : 1.0;

  for (int j = 0; j <= level_count; ++j) {
    double k = multiplier * base_level * (2.0 - std::ldexp(1.0, -j));
    double measure = 0.0;
    for (const GridFunction& g : solution) {
      if (!g.grid.same_layout(grid)) throw GridMismatch("solution snapshots on different grids");
      double count = 0.0;
      for (double v : g.values) {
        if (v >= k) count += 1.0;
      }
      measure += count * cell_volume * weight;
    }
    report.levels.push_back(k);
    report.decay.push_back(measure);
  }
  report.vanished = report.decay.back() == 0.0;
  return report;
}

FastDecayReport fast_decay_check(double y0, double n_factor, double c_factor, double eps,
                                 int steps) {
  if (!(n_factor > 0.0) || !(c_factor > 1.0) || !(eps > 0.0)) {
    throw ParameterGateViolation("need N > 0, C > 1, eps > 0");
  }
  if (!(y0 >= 0.0)) throw ParameterGateViolation("y0 must be nonnegative");
  if (steps < 1) throw ParameterGateViolation("need at least one step");

  FastDecayReport report;
  report.threshold = std::pow(n_factor, -1.0 / eps) * std::pow(c_factor, -1.0 / (eps * eps));
  report.trace.reserve(static_cast<size_t>(steps) + 1);
  report.trace.push_back(y0);
  double y = y0;
  double c_power = 1.0;
  for (int j = 0; j < steps; ++j) {
    y = n_factor * c_power * std::pow(y, 1.0 + eps);
    c_power *= c_factor;
    if (!std::isfinite(y)) {
      y = std::numeric_limits<double>::infinity();
      report.trace.push_back(y);
      break;
    }
    report.trace.push_back(y);
  }
  double last = report.trace.back();
  report.vanishes = last == 0.0 || last < std::min(1e-12, y0);
  return report;
}

StabilityReport stability_compare(const std::vector<GridFunction>& finals) {
  StabilityReport report;
  if (finals.size() < 2) return report;
  const GridSpec& grid = finals.front().grid;
  const double cell_volume = std::pow(grid.spacing, grid.d);
  for (size_t i = 0; i + 1 < finals.size(); ++i) {
    if (!finals[i].grid.same_layout(grid) || !finals[i + 1].grid.same_layout(grid)) {
      throw GridMismatch("stability comparison requires one shared grid");
    }
    double sup = 0.0;
    double l1 = 0.0;
    for (size_t c = 0; c < finals[i].values.size(); ++c) {
      double diff = std::fabs(finals[i + 1].values[c] - finals[i].values[c]);
      sup = std::max(sup, diff);
      l1 += diff;
    }
    report.max_diff.push_back(sup);
    report.l1_diff.push_back(l1 * cell_volume);
  }
  return report;
}

}  // namespace roughflow::fpe
