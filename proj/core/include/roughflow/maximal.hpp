#pragma once

#include "roughflow/grid.hpp"

namespace roughflow::particles {

/// Restricted Hardy-Littlewood maximal function and the difference-quotient
/// bound field built from a mollified copy.
struct MaximalFieldData {
  fpe::GridFunction maximal;  // M_R f on the input grid (balls clipped at the box)
  fpe::GridFunction bound;    // F on an inner grid with full scan margins
};

/// Discrete restricted maximal function: max over ball radii rho in
/// {0, h, ..., R} of the mean of |f| over in-box cells within rho.
fpe::GridFunction restricted_maximal(const fpe::GridFunction& f, double radius);

/// Full report: maximal = M_R f; bound = F = M_{2 sqrt(eps)} |grad f_n| +
/// |f - f_n| / eps with f_n = f mollified at the given level. The bound
/// field lives on the input grid shrunk by 1/level + h + 2 sqrt(eps) so
/// every scan stays inside sampled data. Smooth f then satisfies the
/// two-point estimate |f(x)-f(y)| / sqrt(|x-y|^2 + eps^2) <=
/// 2^d (F(x) + F(y)) for |x - y| <= sqrt(eps).
MaximalFieldData maximal_field(const fpe::GridFunction& f, double radius, double eps, int level);

}  // namespace roughflow::particles
