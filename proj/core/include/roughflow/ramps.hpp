#pragma once

#include <cmath>

namespace roughflow::fields {

/// C-infinity partition ramp built from E(t) = exp(-1/t):
///   S(t) = E(t) / (E(t) + E(1-t)),
/// identically 0 for t <= 0, identically 1 for t >= 1, smooth and strictly
/// increasing in between. All smooth profiles in this library (the annulus
/// profile g, the cutoff chi, the mollifier bump, the coupling clamp) are
/// built from this single ramp.
inline double ramp_e(double t) { return t > 0.0 ? std::exp(-1.0 / t) : 0.0; }

inline double ramp_s(double t) {
  if (t <= 0.0) return 0.0;
  if (t >= 1.0) return 1.0;
  double a = ramp_e(t);
  double b = ramp_e(1.0 - t);
  return a / (a + b);
}

/// Derivative of S. Zero outside (0,1); inside,
///   S'(t) = E(t) E(1-t) (t^-2 + (1-t)^-2) / (E(t) + E(1-t))^2.
inline double ramp_s_deriv(double t) {
  if (t <= 0.0 || t >= 1.0) return 0.0;
  double a = ramp_e(t);
  double b = ramp_e(1.0 - t);
  double denom = a + b;
  return a * b * (1.0 / (t * t) + 1.0 / ((1.0 - t) * (1.0 - t))) / (denom * denom);
}

/// Even annulus profile: g(s) = 0 for |s| <= 1/2, = 1 for |s| >= 1,
/// smooth monotone ramp in between. g(s) = S(2(|s| - 1/2)).
inline double annulus_g(double s) { return ramp_s(2.0 * (std::fabs(s) - 0.5)); }

/// dg/ds. Odd: carries the sign of s.
inline double annulus_g_deriv(double s) {
  double mag = 2.0 * ramp_s_deriv(2.0 * (std::fabs(s) - 0.5));
  return s < 0.0 ? -mag : mag;
}

/// Radial cutoff profile: chi(s) = 1 for |s| <= 1, = 0 for |s| >= 2,
/// smooth monotone in between. chi(s) = 1 - S(|s| - 1).
inline double cutoff_chi(double s) { return 1.0 - ramp_s(std::fabs(s) - 1.0); }

/// Smooth clamp used by the coupling functional: phi_eps(s) = s on
/// [0, eps/2], = eps on [eps, infinity), smooth monotone blend between.
inline double smooth_clamp(double s, double eps) {
  if (s <= 0.5 * eps) return s;
  if (s >= eps) return eps;
  double w = ramp_s(2.0 * s / eps - 1.0);
  return s * (1.0 - w) + eps * w;
}

/// Mollifier bump profile before normalization: 1 near the origin,
/// support in the closed unit ball, smooth. b(u) = 1 - S(2|u| - 1).
inline double bump_profile(double u) { return 1.0 - ramp_s(2.0 * std::fabs(u) - 1.0); }

}  // namespace roughflow::fields
