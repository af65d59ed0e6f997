#pragma once

#include <cstdint>
#include <vector>

#include "roughflow/counterexample.hpp"

namespace roughflow::cex {

/// Splitting experiment: ensembles started on the cone axis at heights
/// shrinking toward the singular point, each paired with its reflection
/// through the hyperplane driven by mirrored noise. The discounted odd
/// functional stays bounded away from zero along the shrinking starts while
/// every mirrored pair cancels exactly, which is the discrete signature of
/// the splitting of the flow at the singular point.
struct SplitConfig {
  CounterexampleParams params;         ///< strength is replaced when calibrate is set
  std::vector<double> start_heights;   ///< axis starts; default 0.05 * 2^{-j}, j = 0..4
  std::int64_t particles = 10000;      ///< ensemble size per start
  double dt = 1.0 / 512.0;             ///< macro step; substepping refines near the locus
  double horizon = 10.0;               ///< functional window; tail bound e^{-horizon}
  std::uint64_t seed = 1;
  int threads = 1;

  bool calibrate = true;               ///< pick the drift strength by pilot runs
  double modulus_floor = 0.5;          ///< required noise-modulus acceptance rate
  double event_floor = 0.3;            ///< required rate of hit-two before min(1, cone-exit)
  std::int64_t pilot_particles = 500;
  double pilot_height = 0.05;
  int strength_exponent_max = 12;      ///< candidate strengths 2^1 .. 2^max

  std::int64_t modulus_paths = 1000;   ///< paths per start entering the modulus rate
  std::int64_t modulus_records = 1000; ///< Brownian records behind the calibration rate
};

struct StartStatistics {
  double height = 0.0;
  double functional_mean = 0.0;   ///< mean of the discounted odd functional
  double functional_se = 0.0;     ///< sample standard error of that mean
  double mirrored_mean = 0.0;     ///< same estimate from the reflected start
  double antithetic_sum = 0.0;    ///< functional_mean + mirrored_mean, exactly zero
  double event_rate = 0.0;        ///< hit-two before min(1, cone-exit)
  double conditional_stay = 0.0;  ///< back-to-one later than 1 + hit-two, among events
  double modulus_rate = 0.0;      ///< noise-modulus pass rate over the sampled paths
  double frozen_fraction = 0.0;
  double mirrored_frozen_fraction = 0.0;
  double tail_bound = 0.0;        ///< e^{-horizon}
};

struct SplitStatistics {
  double strength = 0.0;          ///< drift strength actually used
  bool calibrated = false;
  double pilot_event_rate = 0.0;  ///< at the chosen strength
  double pilot_modulus_rate = 0.0;
  std::vector<StartStatistics> starts;
  double slope = 0.0;             ///< least squares: functional mean vs log height
  double slope_se = 0.0;
};

SplitStatistics run_split_experiment(const SplitConfig& config);

}  // namespace roughflow::cex
