#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "roughflow/grid.hpp"

namespace roughflow::particles {

/// Weighted particle cloud, the empirical measure of a stochastic flow at
/// one instant. Noise is addressed by (seed, substream, base_step + local
/// step), so evolving in segments reproduces a single long run bitwise.
struct ParticleEnsemble {
  int d = 2;
  double time = 0.0;
  std::uint64_t seed = 0;
  std::uint32_t base_step = 0;  // noise step offset carried across evolve calls

  std::vector<double> positions;        // count * d, particle-major
  std::vector<double> weights;          // nonnegative, normalized to 1
  std::vector<std::uint64_t> substream; // unique per particle
  std::vector<std::uint8_t> frozen;     // 1 = no longer evolving

  std::int64_t count() const { return static_cast<std::int64_t>(weights.size()); }
  const double* position(std::int64_t p) const { return positions.data() + p * d; }
  double* position(std::int64_t p) { return positions.data() + p * d; }

  /// Checks the container invariants: normalized weights, finite positions,
  /// unique substreams. Throws ParameterGateViolation on failure.
  void validate() const;
};

/// All particles at one point, equal weights.
ParticleEnsemble delta_ensemble(const std::array<double, 3>& x0, int d, std::int64_t count,
                                std::uint64_t seed);

/// Particles drawn from a nonnegative grid density by inverse-CDF over cells
/// plus a uniform in-cell offset; deterministic in the seed.
ParticleEnsemble sample_from_density(const fpe::GridFunction& density, std::int64_t count,
                                     std::uint64_t seed);

/// One sampled trajectory: states at record times and the raw Brownian
/// increments W(t_{i+1}) - W(t_i) between them (diffusion factor excluded).
struct PathRecord {
  int d = 0;
  std::uint64_t particle = 0;
  std::vector<double> times;   // K + 1 entries
  std::vector<double> states;  // (K + 1) * d
  std::vector<double> noise;   // K * d
  std::int64_t sample_count() const { return static_cast<std::int64_t>(times.size()); }
};

void write_ensemble_csv(const ParticleEnsemble& ensemble, const std::string& path);
void write_paths_csv(const std::vector<PathRecord>& records, const std::string& path);

}  // namespace roughflow::particles
