#include "roughflow/krylov.hpp"

#include <algorithm>
#include <cmath>

#include "roughflow/ensemble.hpp"
#include "roughflow/errors.hpp"
#include "roughflow/evolve.hpp"
#include "roughflow/parallel.hpp"
#include "roughflow/philox.hpp"

namespace roughflow::particles {

KrylovReport krylov_scaling(const fields::CoefficientField& field,
                            const std::function<double(double, const double*)>& f,
                            const std::array<double, 3>& start,
                            const std::vector<double>& windows, std::int64_t particle_count,
                            double dt, std::uint64_t seed, int threads) {
  if (!(dt > 0.0)) throw ParameterGateViolation("dt must be positive");
  if (particle_count < 1) throw ParameterGateViolation("need at least one particle");

  // Windows snap to whole step counts; zero-step windows are dropped.
  std::vector<std::int64_t> step_counts;
  for (double w : windows) {
    std::int64_t k = std::llround(w / dt);
    if (k >= 1) step_counts.push_back(k);
  }
  std::sort(step_counts.begin(), step_counts.end());
  step_counts.erase(std::unique(step_counts.begin(), step_counts.end()), step_counts.end());
  if (step_counts.size() < 2) throw DegenerateFit("need at least two distinct windows");
  const std::int64_t max_steps = step_counts.back();
  const size_t n_windows = step_counts.size();

  const rng::NoiseSource noise(seed);
  EvolveOptions opts;
  opts.dt = dt;

  // Per-particle partial sums, reduced in particle order afterwards.
  std::vector<double> partial(static_cast<size_t>(particle_count) * n_windows, 0.0);

  parallel_for(particle_count, threads, [&](std::int64_t lo, std::int64_t hi) {
    for (std::int64_t p = lo; p < hi; ++p) {
      double x[3] = {start[0], start[1], start[2]};
      double f_prev = f(0.0, x);
      double accum = 0.0;
      bool frozen = false;
      size_t next_window = 0;
      for (std::int64_t s = 0; s < max_steps; ++s) {
        const double t0 = static_cast<double>(s) * dt;
        if (!frozen) {
          detail::StepOutcome out = detail::advance_macro_step(
              field, noise, static_cast<std::uint64_t>(p), static_cast<std::uint32_t>(s), t0,
              dt, x, opts, detail::no_hook);
          frozen = out.frozen;
        }
        double f_new = f(t0 + dt, x);
        accum += 0.5 * (f_prev + f_new);
        f_prev = f_new;
        while (next_window < n_windows && step_counts[next_window] == s + 1) {
          partial[static_cast<size_t>(p) * n_windows + next_window] = accum;
          ++next_window;
        }
      }
    }
  });

  KrylovReport report;
  for (size_t i = 0; i < n_windows; ++i) {
    double sum = 0.0;
    for (std::int64_t p = 0; p < particle_count; ++p) {
      sum += partial[static_cast<size_t>(p) * n_windows + i];
    }
    double mean = sum / static_cast<double>(particle_count);
    report.windows.push_back(static_cast<double>(step_counts[i]) * dt);
    report.estimates.push_back(mean * dt);
  }

  std::vector<double> xs, ys;
  for (size_t i = 0; i < n_windows; ++i) {
    double est = report.estimates[i];
    if (!(est > 0.0) || !std::isfinite(est)) {
      throw DegenerateFit("occupation estimate is not positive and finite");
    }
    xs.push_back(std::log(report.windows[i]));
    ys.push_back(std::log(est));
  }
  double x_mean = 0.0, y_mean = 0.0;
  for (size_t i = 0; i < xs.size(); ++i) {
    x_mean += xs[i];
    y_mean += ys[i];
  }
  x_mean /= static_cast<double>(xs.size());
  y_mean /= static_cast<double>(xs.size());
  double sxy = 0.0, sxx = 0.0;
  for (size_t i = 0; i < xs.size(); ++i) {
    sxy += (xs[i] - x_mean) * (ys[i] - y_mean);
    sxx += (xs[i] - x_mean) * (xs[i] - x_mean);
  }
  if (!(sxx > 0.0)) throw DegenerateFit("windows are not distinct after rounding");
  report.theta_hat = sxy / sxx;
  return report;
}

}  // namespace roughflow::particles
