#pragma once

#include "roughflow/errors.hpp"

namespace roughflow::fields {

/// Subcritical integrability exponents for a drift in d dimensions.
/// The pair (p, q) must satisfy d/p + 2/q = 2 - e with margin e in (0, 1);
/// the dual pair (p*, q*) solves 1/p + 2/p* = 1 and 1/q + 2/q* = 1 and then
/// d/p* + 2/q* = (d + e)/2 holds as an identity.
struct LpsExponents {
  int d = 0;
  double p = 0.0;
  double q = 0.0;
  double e = 0.0;       ///< subcriticality margin, in (0, 1)
  double p_star = 0.0;  ///< dual spatial exponent
  double q_star = 0.0;  ///< dual temporal exponent
};

/// Builds the exponent bundle, or throws SubcriticalityViolation when the
/// margin leaves (0, 1) or the inputs are out of range.
LpsExponents make_lps(int d, double p, double q);

}  // namespace roughflow::fields
