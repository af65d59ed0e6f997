#pragma once

#include "roughflow/field.hpp"
#include "roughflow/grid.hpp"

namespace roughflow::fields {

/// Smooth radial mollifier family rho_n(x) = n^d rho(n x), where rho is a
/// C-infinity bump supported in the unit ball with integral one.
struct MollifierSpec {
  int level = 8;              // scale parameter n; support radius is 1/n
  int points_per_radius = 8;  // lattice resolution for function-backed convolution

  double support_radius() const { return 1.0 / static_cast<double>(level); }
  void validate() const;
};

/// Normalizer c_d = integral of the raw bump profile over the unit ball,
/// so that rho(x) = bump(|x|) / c_d has unit mass. Supports d in {1, 2, 3}.
double mollifier_normalizer(int d);

/// Pointwise density rho_n(x) = n^d bump(n |x|) / c_d.
double mollifier_density(int d, int level, const double* x);

/// Discrete convolution f * rho_n evaluated on `target`, quadrature at the
/// shared grid resolution. The kernel weights are normalized to sum to one,
/// so constants are reproduced exactly and the sup norm never increases.
/// Requires: same spacing and aligned cell centers (else GridMismatch), and
/// the input box must contain the target box plus the 1/n support margin
/// (else MarginTooSmall).
fpe::GridFunction mollify(const fpe::GridFunction& f, const MollifierSpec& spec,
                          const fpe::GridSpec& target);

/// Function-backed mollification of the drift and diffusion of a field, for
/// dynamics that need a smooth approximation. Each evaluation runs a lattice
/// quadrature over the support ball (points_per_radius cells per radius) with
/// weights normalized to sum to one. Affine fields are fixed points; the
/// ellipticity constant and the divergence-free flag are inherited, and the
/// smoothed field no longer declares a singular locus.
CoefficientField mollify(const CoefficientField& field, const MollifierSpec& spec);

}  // namespace roughflow::fields
