#pragma once

#include <functional>

#include "roughflow/grid.hpp"

namespace roughflow::fields {

/// Mixed space-time norm localized by sliding cutoffs: the maximum over
/// lattice centers y in r*Z^d (restricted to the sampling box) of the
/// L^q-in-time norm of the L^p-in-space norm of f * chi_r^y, where
/// chi_r^y(x) = chi(|x - y| / r) is 1 on the ball of radius r around y and
/// vanishes outside radius 2r.
///
/// Space is sampled at the cell centers of `grid` (midpoint rule), time at
/// `time_samples` midpoints of [0, horizon]. Accepts any p, q >= 1; callers
/// wanting the subcritical regime validate exponents separately. Non-finite
/// samples propagate to a +infinity result.
double localized_norm(const std::function<double(double, const double*)>& f,
                      double p, double q, double radius, double horizon,
                      const fpe::GridSpec& grid, int time_samples = 8);

}  // namespace roughflow::fields
