#include "roughflow/maximal.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "roughflow/errors.hpp"
#include "roughflow/mollify.hpp"

namespace roughflow::particles {

namespace {

struct ShellTable {
  // Offsets sorted by radius, with group boundaries at distinct radii.
  std::vector<std::array<int, 3>> offsets;
  std::vector<size_t> group_end;  // offsets[0..group_end[g]) lie within shell g
};

ShellTable build_shells(int d, double radius, double h) {
  ShellTable table;
  const int ext = static_cast<int>(std::floor(radius / h + 1e-9));
  const int span = 2 * ext + 1;
  std::int64_t count = 1;
  for (int k = 0; k < d; ++k) count *= span;

  std::vector<std::pair<double, std::array<int, 3>>> entries;
  for (std::int64_t ci = 0; ci < count; ++ci) {
    std::array<int, 3> off = {0, 0, 0};
    std::int64_t rest = ci;
    double r2 = 0.0;
    for (int k = 0; k < d; ++k) {
      off[k] = static_cast<int>(rest % span) - ext;
      rest /= span;
      double z = off[k] * h;
      r2 += z * z;
    }
    double r = std::sqrt(r2);
    if (r <= radius + 1e-12) entries.emplace_back(r, off);
  }
  std::sort(entries.begin(), entries.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  for (size_t i = 0; i < entries.size(); ++i) {
    table.offsets.push_back(entries[i].second);
    bool boundary = i + 1 == entries.size() || entries[i + 1].first > entries[i].first + 1e-12;
    if (boundary) table.group_end.push_back(i + 1);
  }
  return table;
}

// Maximal scan of |values| on grid `src`, evaluated at the cells of `dst`
// (dst must be index-aligned inside src; base maps dst cell 0 to src).
void maximal_scan(const fpe::GridFunction& src, const ShellTable& shells,
                  const fpe::GridSpec& dst, const int* base, fpe::GridFunction& out) {
  const int d = src.grid.d;
  const int n_src = src.grid.cells_per_dim();
  int idx[3];
  for (std::int64_t c = 0; c < dst.cell_count(); ++c) {
    dst.unflatten(c, idx);
    double sum = 0.0;
    double count = 0.0;
    double best = 0.0;
    size_t o = 0;
    for (size_t g = 0; g < shells.group_end.size(); ++g) {
      for (; o < shells.group_end[g]; ++o) {
        int src_idx[3] = {0, 0, 0};
        bool inside = true;
        for (int k = 0; k < d; ++k) {
          src_idx[k] = idx[k] + base[k] + shells.offsets[o][k];
          if (src_idx[k] < 0 || src_idx[k] >= n_src) inside = false;
        }
        if (!inside) continue;
        sum += std::fabs(src.values[static_cast<size_t>(src.grid.flatten(src_idx))]);
        count += 1.0;
      }
      if (count > 0.0) best = std::max(best, sum / count);
    }
    out.values[static_cast<size_t>(c)] = best;
  }
}

fpe::GridSpec shrink_grid(const fpe::GridSpec& grid, double margin) {
  const double h = grid.spacing;
  const int cells_off = static_cast<int>(std::ceil(margin / h - 1e-9));
  fpe::GridSpec inner = grid;
  inner.half_width = grid.half_width - static_cast<double>(cells_off) * h;
  if (!(inner.half_width > 0.0) || inner.cells_per_dim() < 1) {
    throw MarginTooSmall("scan margins exceed the sampled box");
  }
  return inner;
}

int base_offset(const fpe::GridSpec& outer, const fpe::GridSpec& inner, int axis) {
  double shift = (inner.coord(axis, 0) - outer.coord(axis, 0)) / outer.spacing;
  return static_cast<int>(std::lround(shift));
}

}  // namespace

fpe::GridFunction restricted_maximal(const fpe::GridFunction& f, double radius) {
  if (!(radius >= 0.0)) throw ParameterGateViolation("radius must be nonnegative");
  ShellTable shells = build_shells(f.grid.d, radius, f.grid.spacing);
  fpe::GridFunction out(f.grid, f.time);
  int base[3] = {0, 0, 0};
  maximal_scan(f, shells, f.grid, base, out);
  return out;
}

MaximalFieldData maximal_field(const fpe::GridFunction& f, double radius, double eps, int level) {
  if (!(eps > 0.0)) throw ParameterGateViolation("eps must be positive");
  MaximalFieldData data;
  data.maximal = restricted_maximal(f, radius);

  const fpe::GridSpec& grid = f.grid;
  const double h = grid.spacing;
  const int d = grid.d;

  fields::MollifierSpec spec;
  spec.level = level;

  // f_n on a grid with the mollifier margin, its gradient one cell further
  // in, and F itself with the 2 sqrt(eps) scan margin on top.
  const double scan_radius = 2.0 * std::sqrt(eps);
  fpe::GridSpec fn_grid = shrink_grid(grid, spec.support_radius());
  fpe::GridSpec grad_grid = shrink_grid(grid, spec.support_radius() + h);
  fpe::GridSpec f_grid = shrink_grid(grid, spec.support_radius() + h + scan_radius);

  fpe::GridFunction fn = fields::mollify(f, spec, fn_grid);

  fpe::GridFunction grad_norm(grad_grid, f.time);
  {
    int base[3] = {0, 0, 0};
    for (int k = 0; k < d; ++k) base[k] = base_offset(fn_grid, grad_grid, k);
    const int n_fn = fn_grid.cells_per_dim();
    (void)n_fn;
    int idx[3];
    for (std::int64_t c = 0; c < grad_grid.cell_count(); ++c) {
      grad_grid.unflatten(c, idx);
      double g2 = 0.0;
      for (int k = 0; k < d; ++k) {
        int plus[3], minus[3];
        for (int j = 0; j < d; ++j) plus[j] = minus[j] = idx[j] + base[j];
        plus[k] += 1;
        minus[k] -= 1;
        double diff = (fn.values[static_cast<size_t>(fn_grid.flatten(plus))] -
                       fn.values[static_cast<size_t>(fn_grid.flatten(minus))]) /
                      (2.0 * h);
        g2 += diff * diff;
      }
      grad_norm.values[static_cast<size_t>(c)] = std::sqrt(g2);
    }
  }

  data.bound = fpe::GridFunction(f_grid, f.time);
  {
    ShellTable shells = build_shells(d, scan_radius, h);
    int base[3] = {0, 0, 0};
    for (int k = 0; k < d; ++k) base[k] = base_offset(grad_grid, f_grid, k);
    maximal_scan(grad_norm, shells, f_grid, base, data.bound);

    int base_f[3] = {0, 0, 0};
    int base_fn[3] = {0, 0, 0};
    for (int k = 0; k < d; ++k) {
      base_f[k] = base_offset(grid, f_grid, k);
      base_fn[k] = base_offset(fn_grid, f_grid, k);
    }
    int idx[3];
    for (std::int64_t c = 0; c < f_grid.cell_count(); ++c) {
      f_grid.unflatten(c, idx);
      int i_f[3] = {0, 0, 0};
      int i_fn[3] = {0, 0, 0};
      for (int k = 0; k < d; ++k) {
        i_f[k] = idx[k] + base_f[k];
        i_fn[k] = idx[k] + base_fn[k];
      }
      double residual = std::fabs(f.values[static_cast<size_t>(grid.flatten(i_f))] -
                                  fn.values[static_cast<size_t>(fn_grid.flatten(i_fn))]) /
                        eps;
      data.bound.values[static_cast<size_t>(c)] += residual;
    }
  }
  return data;
}

}  // namespace roughflow::particles
