#include "roughflow/field.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace roughflow::fields {

double SingularLocus::distance(const double* x, int d) const {
  switch (kind) {
    case Kind::none:
      return std::numeric_limits<double>::infinity();
    case Kind::last_axis_hyperplane:
      return std::fabs(x[d - 1]);
  }
  return std::numeric_limits<double>::infinity();
}

void CoefficientField::advective(double t, const double* x, double* v) const {
  drift(t, x, v);
  if (constant_diffusion) return;
  // V^i = b^i - d_i a by central difference at a scale tied to the field,
  // not the caller's grid.
  constexpr double step = 1e-6;
  double xp[3];
  double xm[3];
  for (int k = 0; k < d; ++k) {
    for (int j = 0; j < d; ++j) {
      xp[j] = x[j];
      xm[j] = x[j];
    }
    xp[k] += step;
    xm[k] -= step;
    v[k] -= (diffusion(t, xp) - diffusion(t, xm)) / (2.0 * step);
  }
}

double CoefficientField::sigma(double t, const double* x) const {
  return std::sqrt(2.0 * diffusion(t, x));
}

CoefficientField constant_field(int d, const std::array<double, 3>& b, double a0) {
  CoefficientField f;
  f.d = d;
  f.name = "constant";
  f.drift = [b, d](double, const double*, double* out) {
    for (int k = 0; k < d; ++k) out[k] = b[static_cast<std::size_t>(k)];
  };
  f.diffusion = [a0](double, const double*) { return a0; };
  f.ellipticity = a0 > 0.0 ? std::max(a0, 1.0 / a0) : 1.0;
  f.divergence_free = true;
  f.constant_diffusion = true;
  return f;
}

CoefficientField rotation_field(int d, double a0) {
  CoefficientField f;
  f.d = d;
  f.name = "rotation";
  f.drift = [d](double, const double* x, double* out) {
    out[0] = -x[1];
    out[1] = x[0];
    for (int k = 2; k < d; ++k) out[k] = 0.0;
  };
  f.diffusion = [a0](double, const double*) { return a0; };
  f.ellipticity = a0 > 0.0 ? std::max(a0, 1.0 / a0) : 1.0;
  f.divergence_free = true;
  f.constant_diffusion = true;
  return f;
}

CoefficientField ou_linear_field(int d, double gamma, double a0) {
  CoefficientField f;
  f.d = d;
  f.name = "ou-linear";
  f.drift = [d, gamma](double, const double* x, double* out) {
    for (int k = 0; k < d; ++k) out[k] = -gamma * x[k];
  };
  f.diffusion = [a0](double, const double*) { return a0; };
  f.ellipticity = a0 > 0.0 ? std::max(a0, 1.0 / a0) : 1.0;
  f.divergence_free = false;
  f.constant_diffusion = true;
  return f;
}

}  // namespace roughflow::fields
