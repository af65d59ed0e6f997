#include "roughflow/singular_drift.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "roughflow/errors.hpp"
#include "roughflow/ramps.hpp"

namespace roughflow::fields {

void CounterexampleParams::validate() const {
  if (d < 3) throw ParameterGateViolation("d must be >= 3, got " + std::to_string(d));
  double dd = static_cast<double>(d);
  if (!(p > dd / 2.0) || !(p < dd) || !(p >= 2.0)) {
    throw ParameterGateViolation("p must lie in (d/2, d) with p >= 2; got p=" +
                                 std::to_string(p) + " at d=" + std::to_string(d));
  }
  if (!(alpha > 1.0) || !(alpha < dd / p)) {
    throw ParameterGateViolation("alpha not in (1, d/p): alpha=" + std::to_string(alpha) +
                                 " d/p=" + std::to_string(dd / p));
  }
  if (!(kappa > 1.0) || !(kappa < (dd - 1.0) / alpha)) {
    throw ParameterGateViolation("kappa not in (1, (d-1)/alpha): kappa=" + std::to_string(kappa) +
                                 " bound=" + std::to_string((dd - 1.0) / alpha));
  }
  if (!(strength > 0.0)) throw ParameterGateViolation("strength N must be positive");
}

double CounterexampleParams::eps_n() const {
  return std::pow(strength, -1.0 / (2.0 * (1.0 + alpha)));
}

void counterexample_drift(const CounterexampleParams& params, const double* x, double* b) {
  const int d = params.d;
  const double n = params.strength;
  const double alpha = params.alpha;

  double r2 = 0.0;
  for (int k = 0; k + 1 < d; ++k) r2 += x[k] * x[k];
  double r = std::sqrt(r2);
  // All magnitudes are computed from |x_d| and the vertical component is
  // flipped at the end, so paths below the hyperplane are exact mirrors.
  double height = std::fabs(x[d - 1]);

  if (height == 0.0) {
    if (r == 0.0) {
      // Singular point: tagged non-finite, never thrown.
      for (int k = 0; k < d; ++k) b[k] = std::numeric_limits<double>::quiet_NaN();
      return;
    }
    for (int k = 0; k < d; ++k) b[k] = 0.0;
    return;
  }

  double lateral_scale = 0.0;  // coefficient of x_k for k < d-1
  double vertical = 0.0;       // b_d at height |x_d|
  if (2.0 * height <= r) {
    // Outside the support cone: g and g' both vanish.
    for (int k = 0; k < d; ++k) b[k] = 0.0;
    return;
  }
  double pow_ha = std::pow(height, -alpha);
  if (height >= r) {
    // Inside the unit cone: g = 1, g' = 0.
    lateral_scale = n * alpha * pow_ha / height;
    vertical = n * static_cast<double>(d - 1) * pow_ha;
  } else {
    double s = height / r;
    double g = annulus_g(s);
    double gp = annulus_g_deriv(s);
    lateral_scale = n * alpha * pow_ha / height * g - n * pow_ha / r * gp;
    vertical = n * static_cast<double>(d - 1) * pow_ha * g - n * pow_ha * height / r * gp;
  }
  for (int k = 0; k + 1 < d; ++k) b[k] = lateral_scale * x[k];
  b[d - 1] = x[d - 1] < 0.0 ? -vertical : vertical;
}

namespace {

CoefficientField wrap_field(const CounterexampleParams& params, double a0) {
  params.validate();
  CoefficientField f;
  f.d = params.d;
  f.name = "counterexample";
  f.drift = [params](double, const double* x, double* out) {
    counterexample_drift(params, x, out);
  };
  f.diffusion = [a0](double, const double*) { return a0; };
  f.ellipticity = a0 > 0.0 ? std::max(a0, 1.0 / a0) : 1.0;
  f.divergence_free = true;
  f.constant_diffusion = true;
  f.locus.kind = SingularLocus::Kind::last_axis_hyperplane;
  return f;
}

}  // namespace

CoefficientField counterexample_field(const CounterexampleParams& params) {
  // Unit noise: sigma = I means a = 1/2.
  return wrap_field(params, 0.5);
}

CoefficientField counterexample_field_noiseless(const CounterexampleParams& params) {
  return wrap_field(params, 0.0);
}

}  // namespace roughflow::fields
