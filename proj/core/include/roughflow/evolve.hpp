#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "roughflow/ensemble.hpp"
#include "roughflow/field.hpp"
#include "roughflow/philox.hpp"

namespace roughflow::particles {

struct EvolveOptions {
  double dt = 1e-3;
  double horizon = 1.0;
  int threads = 1;

  bool record = false;
  int record_stride = 1;          // keep every k-th macro step
  std::int64_t record_limit = -1; // cap on recorded particles; -1 = all

  /// Negate the last noise component before use: the antithetic partner of a
  /// run with mirrored starts. With a drift whose lateral components are even
  /// and whose vertical component is odd in x_d, the mirrored run executes
  /// sign-flipped arithmetic step for step, so paired estimates cancel
  /// exactly.
  bool mirror_noise_axis = false;

  double taming_threshold = 0.1;  // substep when |b| dt exceeds this
  bool substepping = true;
  double freeze_height = 1e-8;    // freeze for fields with a hyperplane locus
};

namespace detail {

struct StepOutcome {
  bool frozen = false;
  std::int64_t substeps = 0;
};

inline constexpr std::int64_t max_substeps_per_step = std::int64_t{1} << 20;

/// One tamed Euler-Maruyama macro step of length dt for a single particle,
/// with adaptive substepping: while the tamed-drift criterion |b| delta >
/// threshold holds, the step is split as delta = threshold / |b| with fresh
/// noise per substep. The hook runs after every substep as
///   hook(t_new, x_new, delta, dW)
/// where dW is the raw Brownian increment (d components) actually used.
template <class Hook>
StepOutcome advance_macro_step(const fields::CoefficientField& field,
                               const rng::NoiseSource& noise, std::uint64_t substream,
                               std::uint32_t step_index, double t0, double dt, double* x,
                               const EvolveOptions& opts, Hook&& hook) {
  const int d = field.d;
  const std::uint32_t blocks_per_substep = static_cast<std::uint32_t>((d + 1) / 2);
  const bool has_locus = field.locus.kind != fields::SingularLocus::Kind::none;

  StepOutcome outcome;
  double consumed = 0.0;
  std::uint32_t draw = 0;

  while (consumed < dt) {
    double b[3] = {0.0, 0.0, 0.0};
    field.drift(t0 + consumed, x, b);
    double norm2 = 0.0;
    for (int k = 0; k < d; ++k) norm2 += b[k] * b[k];
    if (!std::isfinite(norm2)) {
      outcome.frozen = true;
      return outcome;
    }
    double speed = std::sqrt(norm2);

    double remaining = dt - consumed;
    double delta = remaining;
    if (opts.substepping && speed * remaining > opts.taming_threshold) {
      delta = opts.taming_threshold / speed;
    }

    double z[4];
    for (std::uint32_t j = 0; j < blocks_per_substep; ++j) {
      noise.gaussian_pair(substream, step_index, draw + j, rng::StreamClass::evolve_noise,
                          z[2 * j], z[2 * j + 1]);
    }
    draw += blocks_per_substep;
    if (opts.mirror_noise_axis) z[d - 1] = -z[d - 1];

    const double sigma = field.sigma(t0 + consumed, x);
    const double tame = 1.0 + delta * speed;
    const double root = std::sqrt(delta);
    double trial[3];
    double dw[3] = {0.0, 0.0, 0.0};
    for (int k = 0; k < d; ++k) {
      dw[k] = root * z[k];
      trial[k] = x[k] + delta * b[k] / tame + sigma * dw[k];
    }
    bool finite = true;
    for (int k = 0; k < d; ++k) {
      if (!std::isfinite(trial[k])) finite = false;
    }
    if (!finite) {
      outcome.frozen = true;
      return outcome;
    }
    if (consumed + delta == consumed) {
      // Substep below time resolution: the drift is too stiff to resolve.
      outcome.frozen = true;
      return outcome;
    }
    for (int k = 0; k < d; ++k) x[k] = trial[k];
    consumed += delta;
    ++outcome.substeps;
    hook(t0 + consumed, x, delta, dw);

    if (has_locus && field.locus.distance(x, d) < opts.freeze_height) {
      outcome.frozen = true;
      return outcome;
    }
    if (outcome.substeps >= max_substeps_per_step) {
      outcome.frozen = true;
      return outcome;
    }
  }
  return outcome;
}

inline void no_hook(double, const double*, double, const double*) {}

}  // namespace detail

struct EvolveResult {
  ParticleEnsemble ensemble;
  std::vector<PathRecord> records;   // per recorded particle, empty unless requested
  std::int64_t newly_frozen = 0;
  std::int64_t substeps_total = 0;
};

/// Advances every non-frozen particle by round(horizon / dt) macro steps of
/// the tamed Euler-Maruyama scheme. Bitwise deterministic in
/// (seed, substreams, base_step, dt) independent of thread count.
EvolveResult evolve(const ParticleEnsemble& start, const fields::CoefficientField& field,
                    const EvolveOptions& options);

}  // namespace roughflow::particles
