#pragma once

#include "roughflow/field.hpp"

namespace roughflow::fields {

/// Parameters of the singular self-repelling drift. The field lives in d >= 3
/// dimensions, scales like N |x_d|^{-alpha} near the hyperplane {x_d = 0},
/// is supported where the lateral radius r satisfies r < 2|x_d|, and is
/// divergence-free. Admissibility gates:
///   p in (d/2, d) and p >= 2,
///   alpha in (1, d/p)    (keeps |b| in L^p locally while too rough for W^{1,1}),
///   kappa in (1, (d-1)/alpha)  (aperture of the survival cone).
struct CounterexampleParams {
  int d = 3;
  double p = 2.0;
  double alpha = 1.2;
  double strength = 256.0;  ///< N
  double kappa = 1.3;

  /// Throws ParameterGateViolation when a gate fails.
  void validate() const;

  /// Noise-modulus threshold exponent bundle: eps_N = N^{-1/(2(1+alpha))}.
  double eps_n() const;
};

/// Evaluates the drift at x. Upper half space (x_d > 0):
///   b_i = N alpha x_i x_d^{-alpha-1} g(x_d/r) - N (x_i/r) x_d^{-alpha} g'(x_d/r),
///   b_d = N (d-1) x_d^{-alpha} g(x_d/r) - N (1/r) x_d^{-alpha+1} g'(x_d/r),
/// with g the annulus profile (0 below 1/2, 1 above 1). The extension to
/// x_d < 0 mirrors the flow through the hyperplane: lateral components even
/// in x_d, vertical component odd, which keeps the field divergence-free and
/// makes reflected noise produce exactly reflected paths. On the hyperplane
/// off the origin the field vanishes; at the origin it is singular and the
/// output is tagged non-finite (quiet NaN) for the caller to handle.
void counterexample_drift(const CounterexampleParams& params, const double* x, double* b);

/// Wraps the drift as a CoefficientField with unit noise (sigma = I, so
/// a = 1/2 and Lambda = 2) and the hyperplane singular locus declared.
CoefficientField counterexample_field(const CounterexampleParams& params);

/// Same drift with zero diffusion; used by deterministic oracles.
CoefficientField counterexample_field_noiseless(const CounterexampleParams& params);

}  // namespace roughflow::fields
