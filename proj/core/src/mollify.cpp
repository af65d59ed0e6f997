#include "roughflow/mollify.hpp"

#include <array>
#include <cmath>
#include <string>
#include <vector>

#include "roughflow/errors.hpp"
#include "roughflow/ramps.hpp"

namespace roughflow::fields {

void MollifierSpec::validate() const {
  if (level < 1) throw ParameterGateViolation("mollifier level must be a positive integer");
  if (points_per_radius < 1) throw ParameterGateViolation("points_per_radius must be >= 1");
}

double mollifier_normalizer(int d) {
  if (d < 1 || d > 3) throw ParameterGateViolation("mollifier supports d in {1,2,3}");
  const double pi = 3.14159265358979323846;
  const double sphere_area = d == 1 ? 2.0 : d == 2 ? 2.0 * pi : 4.0 * pi;
  // Composite Simpson over [0,1] of bump(s) s^{d-1}; the integrand is smooth.
  const int intervals = 1 << 14;
  const double step = 1.0 / intervals;
  double sum = 0.0;
  for (int i = 0; i <= intervals; ++i) {
    double s = i * step;
    double w = (i == 0 || i == intervals) ? 1.0 : (i % 2 == 1 ? 4.0 : 2.0);
    sum += w * bump_profile(s) * std::pow(s, d - 1);
  }
  return sphere_area * sum * step / 3.0;
}

double mollifier_density(int d, int level, const double* x) {
  if (d < 1 || d > 3) throw ParameterGateViolation("mollifier supports d in {1,2,3}");
  static const double normalizers[3] = {mollifier_normalizer(1), mollifier_normalizer(2),
                                        mollifier_normalizer(3)};
  double r2 = 0.0;
  for (int k = 0; k < d; ++k) r2 += x[k] * x[k];
  double u = static_cast<double>(level) * std::sqrt(r2);
  if (u >= 1.0) return 0.0;
  return std::pow(static_cast<double>(level), d) * bump_profile(u) / normalizers[d - 1];
}

namespace {

struct Kernel {
  int d = 0;
  double step = 0.0;
  std::vector<std::array<int, 3>> offsets;  // only nonzero-weight points
  std::vector<double> weights;              // normalized: sum is exactly 1
};

// Lattice quadrature of rho_n at spacing `step`; weights renormalized so the
// discrete kernel has unit mass regardless of quadrature error.
Kernel build_kernel(int d, double support_radius, double step) {
  Kernel ker;
  ker.d = d;
  ker.step = step;
  const int ext = static_cast<int>(std::ceil(support_radius / step));
  const int span = 2 * ext + 1;
  int64_t count = 1;
  for (int k = 0; k < d; ++k) count *= span;
  double total = 0.0;
  for (int64_t ci = 0; ci < count; ++ci) {
    std::array<int, 3> off = {0, 0, 0};
    int64_t rest = ci;
    double r2 = 0.0;
    for (int k = 0; k < d; ++k) {
      off[k] = static_cast<int>(rest % span) - ext;
      rest /= span;
      double z = off[k] * step;
      r2 += z * z;
    }
    double w = bump_profile(std::sqrt(r2) / support_radius);
    if (w > 0.0) {
      ker.offsets.push_back(off);
      ker.weights.push_back(w);
      total += w;
    }
  }
  for (double& w : ker.weights) w /= total;
  return ker;
}

}  // namespace

fpe::GridFunction mollify(const fpe::GridFunction& f, const MollifierSpec& spec,
                          const fpe::GridSpec& target) {
  spec.validate();
  const fpe::GridSpec& in = f.grid;
  if (in.d != target.d) throw GridMismatch("dimension mismatch between input and target grids");
  const int d = in.d;
  const double h = in.spacing;
  if (std::fabs(target.spacing - h) > 1e-12 * h) {
    throw GridMismatch("mollify requires matching grid spacings");
  }
  const double radius = spec.support_radius();
  // The quadrature support reaches radius 1/n around every target cell.
  for (int k = 0; k < d; ++k) {
    double in_lo = in.center[k] - in.half_width;
    double in_hi = in.center[k] + in.half_width;
    double t_lo = target.center[k] - target.half_width;
    double t_hi = target.center[k] + target.half_width;
    if (t_lo - radius < in_lo - 1e-12 || t_hi + radius > in_hi + 1e-12) {
      throw MarginTooSmall("target box plus mollifier support exceeds the sampled box");
    }
  }

  int base[3] = {0, 0, 0};
  for (int k = 0; k < d; ++k) {
    double shift = (target.coord(k, 0) - in.coord(k, 0)) / h;
    base[k] = static_cast<int>(std::lround(shift));
    if (std::fabs(shift - base[k]) > 1e-9) {
      throw GridMismatch("target cell centers are not aligned with the sampled grid");
    }
  }

  Kernel ker = build_kernel(d, radius, h);
  fpe::GridFunction out;
  out.grid = target;
  out.time = f.time;
  out.values.assign(static_cast<size_t>(target.cell_count()), 0.0);

  const int n_in = in.cells_per_dim();
  const int64_t t_cells = target.cell_count();
  for (int64_t c = 0; c < t_cells; ++c) {
    int idx[3];
    target.unflatten(c, idx);
    double acc = 0.0;
    for (size_t j = 0; j < ker.offsets.size(); ++j) {
      int src[3] = {0, 0, 0};
      bool inside = true;
      for (int k = 0; k < d; ++k) {
        src[k] = idx[k] + base[k] + ker.offsets[j][k];
        if (src[k] < 0 || src[k] >= n_in) inside = false;
      }
      if (!inside) throw MarginTooSmall("kernel support left the sampled box");
      acc += ker.weights[j] * f.values[static_cast<size_t>(in.flatten(src))];
    }
    out.values[static_cast<size_t>(c)] = acc;
  }
  return out;
}

CoefficientField mollify(const CoefficientField& field, const MollifierSpec& spec) {
  spec.validate();
  const int d = field.d;
  const double radius = spec.support_radius();
  const double step = radius / spec.points_per_radius;
  Kernel ker = build_kernel(d, radius, step);

  std::vector<std::array<double, 3>> points(ker.offsets.size());
  for (size_t j = 0; j < ker.offsets.size(); ++j) {
    for (int k = 0; k < d; ++k) points[j][k] = ker.offsets[j][k] * step;
  }

  CoefficientField out = field;
  out.name = field.name + "-mollified";
  out.locus = SingularLocus{};
  out.drift = [src = field.drift, weights = ker.weights, points, d](double t, const double* x,
                                                                    double* b) {
    double acc[3] = {0.0, 0.0, 0.0};
    for (size_t j = 0; j < weights.size(); ++j) {
      double shifted[3] = {0.0, 0.0, 0.0};
      for (int k = 0; k < d; ++k) shifted[k] = x[k] - points[j][k];
      double bj[3];
      src(t, shifted, bj);
      for (int k = 0; k < d; ++k) acc[k] += weights[j] * bj[k];
    }
    for (int k = 0; k < d; ++k) b[k] = acc[k];
  };
  if (!field.constant_diffusion) {
    out.diffusion = [src = field.diffusion, weights = ker.weights, points, d](double t,
                                                                              const double* x) {
      double acc = 0.0;
      for (size_t j = 0; j < weights.size(); ++j) {
        double shifted[3] = {0.0, 0.0, 0.0};
        for (int k = 0; k < d; ++k) shifted[k] = x[k] - points[j][k];
        acc += weights[j] * src(t, shifted);
      }
      return acc;
    };
  }
  return out;
}

}  // namespace roughflow::fields
