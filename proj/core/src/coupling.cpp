#include "roughflow/coupling.hpp"

#include <cmath>

#include "roughflow/errors.hpp"
#include "roughflow/evolve.hpp"
#include "roughflow/parallel.hpp"
#include "roughflow/philox.hpp"
#include "roughflow/ramps.hpp"

namespace roughflow::particles {

double coupling_phi(double eps, const double* z, int d) {
  double s = 0.0;
  for (int k = 0; k < d; ++k) s += z[k] * z[k];
  return std::log1p(fields::smooth_clamp(s, eps) / (eps * eps));
}

CouplingDiagnostics coupling_diagnostic(const fields::CoefficientField& field_x,
                                        const fields::CoefficientField& field_y,
                                        const ParticleEnsemble& starts_x,
                                        const ParticleEnsemble& starts_y, double eps,
                                        double radius, double dt, double horizon,
                                        int threads) {
  if (field_x.d != field_y.d || starts_x.d != field_x.d || starts_y.d != field_x.d) {
    throw ParameterGateViolation("coupling requires matching dimensions");
  }
  if (starts_x.count() != starts_y.count()) {
    throw ParameterGateViolation("coupled ensembles must pair up one to one");
  }
  if (starts_x.seed != starts_y.seed || starts_x.base_step != starts_y.base_step ||
      starts_x.substream != starts_y.substream) {
    throw ParameterGateViolation("coupled copies must share seed, base step and substreams");
  }
  if (!(eps > 0.0) || !(radius > 0.0)) {
    throw ParameterGateViolation("eps and radius must be positive");
  }

  const int d = field_x.d;
  const std::int64_t m = starts_x.count();
  const std::int64_t steps = std::max<std::int64_t>(1, std::llround(horizon / dt));

  // Draw alignment between the copies requires one substep per macro step.
  EvolveOptions opts;
  opts.dt = dt;
  opts.substepping = false;

  const rng::NoiseSource noise(starts_x.seed);

  std::vector<double> xs(starts_x.positions);
  std::vector<double> ys(starts_y.positions);
  std::vector<std::uint8_t> stopped(static_cast<size_t>(m), 0);
  std::vector<double> max_z_per(static_cast<size_t>(m), 0.0);

  // Pairs advance independently and write disjoint phi rows; per-step means
  // are reduced afterwards in particle order, independent of threading.
  std::vector<std::vector<double>> phi_rows(static_cast<size_t>(m));

  parallel_for(m, threads, [&](std::int64_t lo, std::int64_t hi) {
    for (std::int64_t p = lo; p < hi; ++p) {
      double* x = xs.data() + p * d;
      double* y = ys.data() + p * d;
      std::vector<double>& row = phi_rows[static_cast<size_t>(p)];
      row.resize(static_cast<size_t>(steps));
      bool halted = false;
      double z[3] = {0.0, 0.0, 0.0};
      double max_z = 0.0;

      for (std::int64_t s = 0; s < steps; ++s) {
        const double t0 = static_cast<double>(s) * dt;
        const std::uint32_t step_index = starts_x.base_step + static_cast<std::uint32_t>(s);
        if (!halted) {
          detail::StepOutcome ox = detail::advance_macro_step(
              field_x, noise, starts_x.substream[static_cast<size_t>(p)], step_index, t0, dt,
              x, opts, detail::no_hook);
          detail::StepOutcome oy = detail::advance_macro_step(
              field_y, noise, starts_x.substream[static_cast<size_t>(p)], step_index, t0, dt,
              y, opts, detail::no_hook);
          if (ox.frozen || oy.frozen) halted = true;

          double nx = 0.0, ny = 0.0;
          for (int k = 0; k < d; ++k) {
            nx += x[k] * x[k];
            ny += y[k] * y[k];
          }
          if (nx > radius * radius && ny > radius * radius) {
            halted = true;
            stopped[static_cast<size_t>(p)] = 1;
          }
        }
        double zn = 0.0;
        for (int k = 0; k < d; ++k) {
          z[k] = x[k] - y[k];
          zn += z[k] * z[k];
        }
        max_z = std::max(max_z, std::sqrt(zn));
        row[static_cast<size_t>(s)] = coupling_phi(eps, z, d);
      }
      max_z_per[static_cast<size_t>(p)] = max_z;
    }
  });

  CouplingDiagnostics diag;
  diag.epsilon = eps;
  diag.radius = radius;
  for (std::int64_t s = 0; s < steps; ++s) {
    double sum = 0.0;
    for (std::int64_t p = 0; p < m; ++p) sum += phi_rows[static_cast<size_t>(p)][static_cast<size_t>(s)];
    diag.times.push_back(static_cast<double>(s + 1) * dt);
    diag.phi_bar.push_back(sum / static_cast<double>(m));
  }
  std::int64_t exits = 0;
  for (std::int64_t p = 0; p < m; ++p) {
    exits += stopped[static_cast<size_t>(p)];
    diag.max_abs_z = std::max(diag.max_abs_z, max_z_per[static_cast<size_t>(p)]);
  }
  diag.exit_fraction = static_cast<double>(exits) / static_cast<double>(m);
  return diag;
}

}  // namespace roughflow::particles
