#include "roughflow/split_experiment.hpp"

#include <cmath>
#include <limits>

#include "roughflow/errors.hpp"
#include "roughflow/evolve.hpp"
#include "roughflow/parallel.hpp"
#include "roughflow/philox.hpp"

namespace roughflow::cex {

namespace {

constexpr double quiet_nan = std::numeric_limits<double>::quiet_NaN();

struct StartRun {
  std::vector<double> functional;
  std::vector<double> hit_two;
  std::vector<double> cone_exit;
  std::vector<double> back_to_one;
  std::vector<std::uint8_t> frozen;
  std::vector<double> modulus;  // statistic of the sampled leading particles
};

/// Evolves one axis ensemble and streams the per-particle reductions: the
/// discounted functional by trapezoid over every substep node (frozen tails
/// in closed form), first-crossing events at substep resolution, and the
/// modulus statistic of the driving noise at macro resolution on [0, 1].
StartRun run_axis_start(const fields::CoefficientField& field, double signed_height,
                        std::int64_t m, std::uint64_t seed, double dt, double horizon,
                        bool mirror_noise, std::int64_t modulus_paths, double alpha,
                        int threads) {
  const int d = field.d;
  const std::int64_t steps = std::max<std::int64_t>(1, std::llround(horizon / dt));
  const std::int64_t unit_steps =
      std::min<std::int64_t>(steps, std::llround(1.0 / dt));
  const double t_end = steps * dt;

  StartRun run;
  run.functional.assign(static_cast<size_t>(m), 0.0);
  run.hit_two.assign(static_cast<size_t>(m), quiet_nan);
  run.cone_exit.assign(static_cast<size_t>(m), quiet_nan);
  run.back_to_one.assign(static_cast<size_t>(m), quiet_nan);
  run.frozen.assign(static_cast<size_t>(m), 0);
  run.modulus.assign(static_cast<size_t>(std::min(modulus_paths, m)), 0.0);

  const rng::NoiseSource noise(seed);
  particles::EvolveOptions opts;
  opts.dt = dt;
  opts.mirror_noise_axis = mirror_noise;

  parallel_for(m, threads, [&](std::int64_t lo, std::int64_t hi) {
    std::vector<double> w_samples;
    std::vector<double> w_times;
    for (std::int64_t p = lo; p < hi; ++p) {
      double x[3] = {0.0, 0.0, 0.0};
      x[d - 1] = signed_height;

      detail::EventTracker tracker;
      tracker.reset(0.0, x, d);

      const bool sample_noise = p < modulus_paths;
      double w_acc[3] = {0.0, 0.0, 0.0};
      std::int64_t w_filled = 1;
      if (sample_noise) {
        w_samples.assign(static_cast<size_t>(unit_steps + 1) * d, 0.0);
        w_times.assign(static_cast<size_t>(unit_steps + 1), 0.0);
      }

      double value = 0.0;
      double node_t = 0.0;
      double node_f = height_observable(x[d - 1]);
      double node_w = node_f;  // e^{-0} = 1
      bool frozen = false;

      auto hook = [&](double t, const double* xs, double, const double* dw) {
        tracker.observe(t, xs, d);
        const double f = height_observable(xs[d - 1]);
        const double w = std::exp(-t) * f;
        value += 0.5 * (node_w + w) * (t - node_t);
        node_t = t;
        node_f = f;
        node_w = w;
        if (sample_noise) {
          for (int k = 0; k < d; ++k) w_acc[k] += dw[k];
        }
      };

      for (std::int64_t k = 0; k < steps; ++k) {
        auto outcome = particles::detail::advance_macro_step(
            field, noise, static_cast<std::uint64_t>(p), static_cast<std::uint32_t>(k),
            k * dt, dt, x, opts, hook);
        if (outcome.frozen) {
          frozen = true;
          // Constant tail of the discounted functional from the freeze node.
          value += node_f * (std::exp(-node_t) - std::exp(-t_end));
          break;
        }
        if (sample_noise && k < unit_steps) {
          w_times[static_cast<size_t>(k + 1)] = (k + 1) * dt;
          for (int j = 0; j < d; ++j) {
            w_samples[static_cast<size_t>((k + 1) * d + j)] = w_acc[j];
          }
          ++w_filled;
        }
      }

      run.functional[static_cast<size_t>(p)] = value;
      run.hit_two[static_cast<size_t>(p)] = tracker.hit_two;
      run.cone_exit[static_cast<size_t>(p)] = tracker.cone_exit;
      run.back_to_one[static_cast<size_t>(p)] = tracker.back_to_one;
      run.frozen[static_cast<size_t>(p)] = frozen ? 1 : 0;
      if (sample_noise) {
        std::vector<double> w_part(w_samples.begin(), w_samples.begin() + w_filled * d);
        std::vector<double> t_part(w_times.begin(), w_times.begin() + w_filled);
        run.modulus[static_cast<size_t>(p)] = detail::modulus_statistic(w_part, t_part, d, alpha);
      }
    }
  });
  return run;
}

double mean_of(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

double se_of(const std::vector<double>& v, double mean) {
  if (v.size() < 2) return 0.0;
  double ss = 0.0;
  for (double x : v) {
    double r = x - mean;
    ss += r * r;
  }
  return std::sqrt(ss / static_cast<double>(v.size() - 1)) /
         std::sqrt(static_cast<double>(v.size()));
}

/// Event: hit-two strictly before both 1 and the cone exit.
bool splitting_event(double hit_two, double cone_exit) {
  if (std::isnan(hit_two) || hit_two >= 1.0) return false;
  return std::isnan(cone_exit) || hit_two < cone_exit;
}

double event_rate_of(const StartRun& run) {
  std::int64_t hits = 0;
  const std::int64_t m = static_cast<std::int64_t>(run.functional.size());
  for (std::int64_t p = 0; p < m; ++p) {
    if (splitting_event(run.hit_two[static_cast<size_t>(p)],
                        run.cone_exit[static_cast<size_t>(p)]))
      ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(m);
}

/// Per-record modulus statistics of plain Brownian noise at the experiment
/// resolution; strength-independent, so candidate thresholds reuse them.
std::vector<double> brownian_modulus_statistics(std::int64_t records, int d, double dt,
                                                std::uint64_t seed, double alpha,
                                                int threads) {
  const std::int64_t steps = std::llround(1.0 / dt);
  const std::uint32_t blocks = static_cast<std::uint32_t>((d + 1) / 2);
  const rng::NoiseSource noise(seed);
  std::vector<double> stats(static_cast<size_t>(records), 0.0);

  parallel_for(records, threads, [&](std::int64_t lo, std::int64_t hi) {
    std::vector<double> w(static_cast<size_t>(steps + 1) * d, 0.0);
    std::vector<double> times(static_cast<size_t>(steps + 1), 0.0);
    for (std::int64_t b = lo; b < hi; ++b) {
      double acc[3] = {0.0, 0.0, 0.0};
      const double root = std::sqrt(dt);
      for (std::int64_t k = 0; k < steps; ++k) {
        double z[4];
        for (std::uint32_t j = 0; j < blocks; ++j) {
          noise.gaussian_pair(static_cast<std::uint64_t>(b), static_cast<std::uint32_t>(k), j,
                              rng::StreamClass::scratch, z[2 * j], z[2 * j + 1]);
        }
        for (int j = 0; j < d; ++j) acc[j] += root * z[j];
        times[static_cast<size_t>(k + 1)] = (k + 1) * dt;
        for (int j = 0; j < d; ++j) w[static_cast<size_t>((k + 1) * d + j)] = acc[j];
      }
      stats[static_cast<size_t>(b)] = detail::modulus_statistic(w, times, d, alpha);
    }
  });
  return stats;
}

double pass_rate(const std::vector<double>& stats, double threshold) {
  std::int64_t pass = 0;
  for (double s : stats) {
    if (s <= threshold) ++pass;
  }
  return static_cast<double>(pass) / static_cast<double>(stats.size());
}

double modulus_threshold(double strength, double alpha) {
  return std::pow(strength, 1.0 / (2.0 * (1.0 + alpha)));
}

}  // namespace

SplitStatistics run_split_experiment(const SplitConfig& config) {
  CounterexampleParams params = config.params;
  params.validate();
  if (params.d > 3) {
    throw ParameterGateViolation("the particle engine is limited to dimension 3");
  }
  if (config.particles < 1 || config.pilot_particles < 1) {
    throw ParameterGateViolation("ensemble sizes must be positive");
  }
  if (!(config.dt > 0.0) || !(config.horizon >= 1.0)) {
    throw ParameterGateViolation("need dt > 0 and horizon >= 1");
  }
  std::vector<double> heights = config.start_heights;
  if (heights.empty()) {
    for (int j = 0; j <= 4; ++j) heights.push_back(0.05 * std::ldexp(1.0, -j));
  }
  for (double h : heights) {
    if (!(h > 0.0)) throw ParameterGateViolation("start heights must be positive");
  }

  SplitStatistics stats;

  // Strength calibration: Brownian modulus statistics once, then the
  // smallest power-of-two strength whose threshold passes the modulus floor
  // and whose pilot ensemble meets the event floor.
  const std::vector<double> brownian_stats = brownian_modulus_statistics(
      config.modulus_records, params.d, config.dt, config.seed, params.alpha, config.threads);

  if (config.calibrate) {
    bool found = false;
    for (int e = 1; e <= config.strength_exponent_max && !found; ++e) {
      const double candidate = std::ldexp(1.0, e);
      const double mod_rate = pass_rate(brownian_stats, modulus_threshold(candidate, params.alpha));
      if (mod_rate < config.modulus_floor) continue;
      CounterexampleParams trial = params;
      trial.strength = candidate;
      trial.validate();
      const auto pilot_field = fields::counterexample_field(trial);
      StartRun pilot = run_axis_start(pilot_field, config.pilot_height, config.pilot_particles,
                                      config.seed, config.dt, 1.0, false, 0, params.alpha,
                                      config.threads);
      const double ev = event_rate_of(pilot);
      if (ev >= config.event_floor) {
        params.strength = candidate;
        stats.pilot_event_rate = ev;
        stats.pilot_modulus_rate = mod_rate;
        found = true;
      }
    }
    if (!found) {
      throw ParameterGateViolation("no admissible drift strength up to the candidate cap");
    }
    stats.calibrated = true;
  } else {
    const auto pilot_field = fields::counterexample_field(params);
    StartRun pilot = run_axis_start(pilot_field, config.pilot_height, config.pilot_particles,
                                    config.seed, config.dt, 1.0, false, 0, params.alpha,
                                    config.threads);
    stats.pilot_event_rate = event_rate_of(pilot);
    stats.pilot_modulus_rate =
        pass_rate(brownian_stats, modulus_threshold(params.strength, params.alpha));
  }
  stats.strength = params.strength;

  const auto field = fields::counterexample_field(params);
  const double threshold = modulus_threshold(params.strength, params.alpha);

  for (double height : heights) {
    StartRun plus = run_axis_start(field, height, config.particles, config.seed, config.dt,
                                   config.horizon, false, config.modulus_paths, params.alpha,
                                   config.threads);
    StartRun minus = run_axis_start(field, -height, config.particles, config.seed, config.dt,
                                    config.horizon, true, 0, params.alpha, config.threads);

    StartStatistics s;
    s.height = height;
    s.functional_mean = mean_of(plus.functional);
    s.functional_se = se_of(plus.functional, s.functional_mean);
    s.mirrored_mean = mean_of(minus.functional);
    s.antithetic_sum = s.functional_mean + s.mirrored_mean;
    s.event_rate = event_rate_of(plus);

    std::int64_t events = 0;
    std::int64_t stayed = 0;
    for (std::int64_t p = 0; p < config.particles; ++p) {
      if (!splitting_event(plus.hit_two[static_cast<size_t>(p)],
                           plus.cone_exit[static_cast<size_t>(p)]))
        continue;
      ++events;
      const double back = plus.back_to_one[static_cast<size_t>(p)];
      if (std::isnan(back) || back > 1.0 + plus.hit_two[static_cast<size_t>(p)]) ++stayed;
    }
    s.conditional_stay =
        events > 0 ? static_cast<double>(stayed) / static_cast<double>(events) : 0.0;
    s.modulus_rate = plus.modulus.empty() ? 0.0 : pass_rate(plus.modulus, threshold);

    std::int64_t frozen_plus = 0;
    std::int64_t frozen_minus = 0;
    for (std::int64_t p = 0; p < config.particles; ++p) {
      frozen_plus += plus.frozen[static_cast<size_t>(p)];
      frozen_minus += minus.frozen[static_cast<size_t>(p)];
    }
    s.frozen_fraction = static_cast<double>(frozen_plus) / static_cast<double>(config.particles);
    s.mirrored_frozen_fraction =
        static_cast<double>(frozen_minus) / static_cast<double>(config.particles);
    s.tail_bound = std::exp(-config.horizon);
    stats.starts.push_back(s);
  }

  // Least-squares slope of the functional mean against log height, with the
  // usual residual-based standard error.
  const size_t n = stats.starts.size();
  if (n >= 3) {
    double sx = 0.0, sy = 0.0;
    for (const auto& s : stats.starts) {
      sx += std::log(s.height);
      sy += s.functional_mean;
    }
    const double mx = sx / static_cast<double>(n);
    const double my = sy / static_cast<double>(n);
    double sxx = 0.0, sxy = 0.0;
    for (const auto& s : stats.starts) {
      const double dx = std::log(s.height) - mx;
      sxx += dx * dx;
      sxy += dx * (s.functional_mean - my);
    }
    stats.slope = sxy / sxx;
    const double intercept = my - stats.slope * mx;
    double rss = 0.0;
    for (const auto& s : stats.starts) {
      const double r = s.functional_mean - (intercept + stats.slope * std::log(s.height));
      rss += r * r;
    }
    stats.slope_se = std::sqrt(rss / static_cast<double>(n - 2) / sxx);
  } else {
    stats.slope = quiet_nan;
    stats.slope_se = quiet_nan;
  }
  return stats;
}

}  // namespace roughflow::cex
