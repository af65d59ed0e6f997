#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <vector>

#include "roughflow/field.hpp"

namespace roughflow::particles {

/// Occupation-integral scaling: ensemble estimates of
/// E integral_0^delta f(t, X_t) dt over a list of window lengths, and the
/// log-log slope theta_hat of estimate against window.
struct KrylovReport {
  std::vector<double> windows;    // effective windows, rounded to step multiples
  std::vector<double> estimates;  // ensemble-mean trapezoid quadratures
  double theta_hat = 0.0;
};

/// Windows are rounded to whole multiples of dt; estimates are computed as
/// (mean trapezoid sum) * dt so that f == 1 yields estimate == window
/// bitwise and theta_hat == 1 exactly. Throws DegenerateFit when any
/// estimate is nonpositive or non-finite, or fewer than two windows remain.
KrylovReport krylov_scaling(const fields::CoefficientField& field,
                            const std::function<double(double, const double*)>& f,
                            const std::array<double, 3>& start,
                            const std::vector<double>& windows, std::int64_t particle_count,
                            double dt, std::uint64_t seed, int threads = 1);

}  // namespace roughflow::particles
