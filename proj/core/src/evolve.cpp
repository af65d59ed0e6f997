#include "roughflow/evolve.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>

#include "roughflow/errors.hpp"
#include "roughflow/parallel.hpp"

namespace roughflow::particles {

EvolveResult evolve(const ParticleEnsemble& start, const fields::CoefficientField& field,
                    const EvolveOptions& options) {
  if (field.d != start.d) throw ParameterGateViolation("field and ensemble dimensions differ");
  if (!(options.dt > 0.0)) throw ParameterGateViolation("dt must be positive");
  if (!(options.horizon > 0.0)) throw ParameterGateViolation("horizon must be positive");

  const std::int64_t steps =
      std::max<std::int64_t>(1, std::llround(options.horizon / options.dt));
  const double dt = options.dt;
  const int d = start.d;
  const std::int64_t m = start.count();

  EvolveResult result;
  result.ensemble = start;
  ParticleEnsemble& e = result.ensemble;

  const std::int64_t record_count =
      options.record
          ? (options.record_limit < 0 ? m : std::min<std::int64_t>(m, options.record_limit))
          : 0;
  if (record_count > 0) result.records.resize(static_cast<size_t>(record_count));

  const rng::NoiseSource noise(e.seed);
  // Integer tallies commute, so atomics keep the totals independent of the
  // thread partition.
  std::atomic<std::int64_t> frozen_total{0};
  std::atomic<std::int64_t> substeps_total{0};

  parallel_for(m, options.threads, [&](std::int64_t lo, std::int64_t hi) {
    std::int64_t local_frozen = 0;
    std::int64_t local_substeps = 0;
    for (std::int64_t p = lo; p < hi; ++p) {
      const bool recording = p < record_count;
      PathRecord* rec = recording ? &result.records[static_cast<size_t>(p)] : nullptr;
      double w_accum[3] = {0.0, 0.0, 0.0};
      if (rec) {
        rec->d = d;
        rec->particle = e.substream[static_cast<size_t>(p)];
        rec->times.push_back(e.time);
        for (int k = 0; k < d; ++k) rec->states.push_back(e.position(p)[k]);
      }
      if (e.frozen[static_cast<size_t>(p)]) {
        if (rec) {
          // Frozen particles contribute a flat path with zero noise.
          for (std::int64_t s = 0; s < steps; ++s) {
            if ((s + 1) % options.record_stride == 0 || s + 1 == steps) {
              rec->times.push_back(e.time + static_cast<double>(s + 1) * dt);
              for (int k = 0; k < d; ++k) rec->states.push_back(e.position(p)[k]);
              for (int k = 0; k < d; ++k) rec->noise.push_back(0.0);
            }
          }
        }
        continue;
      }

      double x[3] = {0.0, 0.0, 0.0};
      for (int k = 0; k < d; ++k) x[k] = e.position(p)[k];
      bool frozen = false;

      for (std::int64_t s = 0; s < steps; ++s) {
        const double t_local = e.time + static_cast<double>(s) * dt;
        const std::uint32_t step_index = e.base_step + static_cast<std::uint32_t>(s);
        detail::StepOutcome out;
        if (rec) {
          out = detail::advance_macro_step(
              field, noise, e.substream[static_cast<size_t>(p)], step_index, t_local, dt, x,
              options, [&](double, const double*, double, const double* dw) {
                for (int k = 0; k < d; ++k) w_accum[k] += dw[k];
              });
        } else {
          out = detail::advance_macro_step(field, noise, e.substream[static_cast<size_t>(p)],
                                           step_index, t_local, dt, x, options,
                                           detail::no_hook);
        }
        local_substeps += out.substeps;
        if (rec &&
            ((s + 1) % options.record_stride == 0 || s + 1 == steps || out.frozen)) {
          rec->times.push_back(t_local + dt);
          for (int k = 0; k < d; ++k) rec->states.push_back(x[k]);
          for (int k = 0; k < d; ++k) {
            rec->noise.push_back(w_accum[k]);
            w_accum[k] = 0.0;
          }
        }
        if (out.frozen) {
          frozen = true;
          break;
        }
      }

      for (int k = 0; k < d; ++k) e.position(p)[k] = x[k];
      if (frozen) {
        e.frozen[static_cast<size_t>(p)] = 1;
        local_frozen += 1;
      }
    }
    frozen_total.fetch_add(local_frozen, std::memory_order_relaxed);
    substeps_total.fetch_add(local_substeps, std::memory_order_relaxed);
  });

  result.newly_frozen = frozen_total.load();
  result.substeps_total = substeps_total.load();
  e.time += static_cast<double>(steps) * dt;
  e.base_step += static_cast<std::uint32_t>(steps);
  return result;
}

}  // namespace roughflow::particles
