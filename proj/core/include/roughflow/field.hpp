#pragma once

#include <array>
#include <functional>
#include <string>

namespace roughflow::fields {

/// Where a field's coefficients blow up, if anywhere. Grid-based consumers
/// cap face velocities near the locus; particle consumers freeze on contact.
struct SingularLocus {
  enum class Kind { none, last_axis_hyperplane } kind = Kind::none;

  /// Distance from x to the locus (+infinity when there is none).
  double distance(const double* x, int d) const;
};

/// Time-space coefficient pair (b, a) of the generator a : D^2 + b . D with
/// a isotropic: a(t,x) = a_scalar(t,x) * I. The advective velocity of the
/// divergence-form equation is V = b - grad a (componentwise V^i = b^i -
/// d_i a); for constant a the two coincide. Particle dynamics use the noise
/// amplitude sigma = sqrt(2 a).
struct CoefficientField {
  int d = 2;
  std::string name;
  std::function<void(double t, const double* x, double* b)> drift;
  std::function<double(double t, const double* x)> diffusion;  ///< scalar a
  double ellipticity = 1.0;  ///< Lambda with 1/Lambda <= a <= Lambda
  bool divergence_free = false;
  bool constant_diffusion = true;
  bool autonomous = true;  ///< coefficients independent of t
  SingularLocus locus;

  /// V = b - grad a, the advective velocity of the divergence-form step.
  /// Uses the analytic shortcut for constant a and a central difference
  /// otherwise.
  void advective(double t, const double* x, double* v) const;

  double sigma(double t, const double* x) const;
};

/// Built-in fields. Names are the config-facing identifiers.
CoefficientField constant_field(int d, const std::array<double, 3>& b, double a0 = 1.0);
CoefficientField rotation_field(int d, double a0 = 1.0);
CoefficientField ou_linear_field(int d, double gamma, double a0 = 1.0);

}  // namespace roughflow::fields
