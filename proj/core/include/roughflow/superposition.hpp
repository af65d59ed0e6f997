#pragma once

#include <cstdint>
#include <vector>

#include "roughflow/field.hpp"
#include "roughflow/grid.hpp"

namespace roughflow::particles {

/// Side-by-side run of the grid solver and the particle engine from the same
/// initial density, compared as L1 distances at the check times.
struct SuperpositionReport {
  std::vector<double> times;
  std::vector<double> l1_discrepancy;
  std::vector<double> overflow;  // particle weight outside the box per check time
  double fpe_dt = 0.0;
  double mc_dt = 0.0;
};

/// phi must be a nonnegative density on `grid`; check_times must be sorted,
/// positive multiples of dt within grid.horizon. The same dt is used for the
/// grid march (validated against its stability bound) and the particle step.
SuperpositionReport superposition_check(const fields::CoefficientField& field,
                                        const fpe::GridFunction& phi, const fpe::GridSpec& grid,
                                        std::int64_t particle_count, double dt,
                                        const std::vector<double>& check_times,
                                        std::uint64_t seed, int threads = 1);

}  // namespace roughflow::particles
