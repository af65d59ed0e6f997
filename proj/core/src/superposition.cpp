#include "roughflow/superposition.hpp"

#include <cmath>

#include "roughflow/errors.hpp"
#include "roughflow/evolve.hpp"
#include "roughflow/fpe.hpp"
#include "roughflow/histogram.hpp"

namespace roughflow::particles {

SuperpositionReport superposition_check(const fields::CoefficientField& field,
                                        const fpe::GridFunction& phi, const fpe::GridSpec& grid,
                                        std::int64_t particle_count, double dt,
                                        const std::vector<double>& check_times,
                                        std::uint64_t seed, int threads) {
  if (check_times.empty()) throw ParameterGateViolation("need at least one check time");
  for (size_t i = 0; i < check_times.size(); ++i) {
    if (!(check_times[i] > 0.0) || check_times[i] > grid.horizon * (1.0 + 1e-9)) {
      throw ParameterGateViolation("check times must lie in (0, horizon]");
    }
    if (i > 0 && !(check_times[i] > check_times[i - 1])) {
      throw ParameterGateViolation("check times must be strictly increasing");
    }
  }

  fpe::GridSpec fpe_grid = grid;
  fpe_grid.dt = dt;

  fpe::FpeOptions opts;
  opts.form = fpe::EquationForm::conservative;
  opts.snapshot_times = check_times;
  opts.threads = threads;
  fpe::FpeResult pde = solve_fpe(field, phi, fpe_grid, opts);

  ParticleEnsemble ensemble = sample_from_density(phi, particle_count, seed);

  SuperpositionReport report;
  report.fpe_dt = pde.dt;
  report.mc_dt = dt;
  const double cell_volume = std::pow(grid.spacing, grid.d);

  double reached = 0.0;
  for (size_t i = 0; i < check_times.size(); ++i) {
    EvolveOptions eopts;
    eopts.dt = dt;
    eopts.horizon = check_times[i] - reached;
    eopts.threads = threads;
    EvolveResult step = evolve(ensemble, field, eopts);
    ensemble = std::move(step.ensemble);
    reached = check_times[i];

    Histogram hist = density_histogram(ensemble, grid);
    const fpe::GridFunction& u = pde.snapshots[i];
    double l1 = 0.0;
    for (size_t c = 0; c < u.values.size(); ++c) {
      l1 += std::fabs(hist.density.values[c] - u.values[c]);
    }
    report.times.push_back(check_times[i]);
    report.l1_discrepancy.push_back(l1 * cell_volume);
    report.overflow.push_back(hist.overflow_weight);
  }
  return report;
}

}  // namespace roughflow::particles
