#include "roughflow/counterexample.hpp"

#include <cmath>
#include <limits>

#include "roughflow/errors.hpp"
#include "roughflow/ramps.hpp"

namespace roughflow::cex {

namespace {

constexpr double quiet_nan = std::numeric_limits<double>::quiet_NaN();

double lateral_radius(const double* x, int d) {
  double r2 = 0.0;
  for (int k = 0; k + 1 < d; ++k) r2 += x[k] * x[k];
  return std::sqrt(r2);
}

double skeleton_rate_root(const CounterexampleParams& params, double y0, double t,
                          double rate_scale) {
  const double q = 1.0 + params.alpha;
  const double base =
      std::pow(y0, q) + rate_scale * params.strength * (params.d - 1) * q * t;
  return std::pow(base, 1.0 / q);
}

}  // namespace

bool cone_membership(const double* x, int d, double aperture) {
  return x[d - 1] > aperture * lateral_radius(x, d);
}

double skeleton_closed_form(const CounterexampleParams& params, double y0, double t) {
  return skeleton_rate_root(params, y0, t, 1.0);
}

double growth_factor(const CounterexampleParams& params) {
  const double q = 1.0 + params.alpha;
  return std::pow(1.0 + (params.d - 1) * q, 1.0 / q);
}

double sigma_hit_time(const CounterexampleParams& params, double y0) {
  const double q = 1.0 + params.alpha;
  return (std::pow(2.0, q) - std::pow(y0, q)) / (params.strength * (params.d - 1) * q);
}

double skeleton_envelope_lower(const CounterexampleParams& params, double y0, double t) {
  const double scale = std::pow(1.0 + params.eps_n(), -params.alpha);
  return skeleton_rate_root(params, y0, t, scale);
}

double skeleton_envelope_upper(const CounterexampleParams& params, double y0, double t) {
  const double scale = std::pow(1.0 - params.eps_n(), -params.alpha);
  return skeleton_rate_root(params, y0, t, scale);
}

SkeletonSolution skeleton_solve(const CounterexampleParams& params, double y0, double t_end,
                                int steps) {
  params.validate();
  if (!(y0 > 0.0)) throw ParameterGateViolation("skeleton start height must be positive");
  if (steps < 1) throw ParameterGateViolation("skeleton needs at least one step");
  if (!(t_end > 0.0)) throw ParameterGateViolation("skeleton horizon must be positive");

  const double c = params.strength * (params.d - 1);
  const double alpha = params.alpha;
  auto rate = [c, alpha](double y) { return c * std::pow(y, -alpha); };

  SkeletonSolution sol;
  sol.start_height = y0;
  sol.step_horizon = std::pow(y0, 1.0 + alpha) / params.strength;
  sol.times.reserve(static_cast<size_t>(steps) + 1);
  sol.heights.reserve(static_cast<size_t>(steps) + 1);

  const double h = t_end / steps;
  double y = y0;
  sol.times.push_back(0.0);
  sol.heights.push_back(y);
  for (int i = 0; i < steps; ++i) {
    const double k1 = rate(y);
    const double k2 = rate(y + 0.5 * h * k1);
    const double k3 = rate(y + 0.5 * h * k2);
    const double k4 = rate(y + h * k3);
    y += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    const double t = (i + 1) * h;
    sol.times.push_back(t);
    sol.heights.push_back(y);
    const double exact = skeleton_closed_form(params, y0, t);
    const double rel = std::fabs(y - exact) / exact;
    if (rel > sol.max_rel_error) sol.max_rel_error = rel;
  }
  return sol;
}

double height_observable(double y) {
  const double g = fields::annulus_g(std::fabs(y));
  return y < 0.0 ? -g : g;
}

FunctionalValue path_functional(const particles::PathRecord& path, double t_max) {
  if (path.sample_count() < 1) throw ParameterGateViolation("path record is empty");
  FunctionalValue out;
  const int d = path.d;
  double prev_t = path.times[0];
  double prev_w = std::exp(-prev_t) * height_observable(path.states[static_cast<size_t>(d - 1)]);
  double last_t = prev_t;
  for (std::int64_t i = 1; i < path.sample_count(); ++i) {
    double t = path.times[static_cast<size_t>(i)];
    double xd = path.states[static_cast<size_t>(i * d + (d - 1))];
    if (t > t_max) break;
    const double w = std::exp(-t) * height_observable(xd);
    out.value += 0.5 * (prev_w + w) * (t - prev_t);
    prev_t = t;
    prev_w = w;
    last_t = t;
  }
  out.tail_bound = std::exp(-last_t);
  return out;
}

namespace detail {

void EventTracker::reset(double t0, const double* x, int d) {
  prev_t = t0;
  prev_xd = x[d - 1];
  prev_phi = x[d - 1] - lateral_radius(x, d);
  cone_exit = quiet_nan;
  hit_zero = quiet_nan;
  hit_two = quiet_nan;
  back_to_one = quiet_nan;
  if (prev_phi <= 0.0) cone_exit = t0;
  if (prev_xd <= 0.0) hit_zero = t0;
  if (prev_xd >= 2.0) hit_two = t0;
}

void EventTracker::observe(double t, const double* x, int d) {
  const double xd = x[d - 1];
  const double phi = xd - lateral_radius(x, d);
  if (std::isnan(cone_exit) && prev_phi > 0.0 && phi <= 0.0) {
    cone_exit = prev_t + (prev_phi / (prev_phi - phi)) * (t - prev_t);
  }
  if (std::isnan(hit_zero) && prev_xd > 0.0 && xd <= 0.0) {
    hit_zero = prev_t + (prev_xd / (prev_xd - xd)) * (t - prev_t);
  }
  if (std::isnan(hit_two) && prev_xd < 2.0 && xd >= 2.0) {
    hit_two = prev_t + ((2.0 - prev_xd) / (xd - prev_xd)) * (t - prev_t);
  }
  // After the level-2 crossing the node heights stay above 1 until the
  // level-1 crossing, so a segment-wise test suffices.
  if (!std::isnan(hit_two) && std::isnan(back_to_one) && prev_xd > 1.0 && xd <= 1.0) {
    double cross = prev_t + ((prev_xd - 1.0) / (prev_xd - xd)) * (t - prev_t);
    if (cross > hit_two) back_to_one = cross;
  }
  prev_t = t;
  prev_xd = xd;
  prev_phi = phi;
}

}  // namespace detail

bool StoppingTimes::has_cone_exit() const { return !std::isnan(cone_exit); }
bool StoppingTimes::has_hit_zero() const { return !std::isnan(hit_zero); }
bool StoppingTimes::has_hit_two() const { return !std::isnan(hit_two); }
bool StoppingTimes::has_back_to_one() const { return !std::isnan(back_to_one); }

StoppingTimes detect_stopping_times(const particles::PathRecord& path) {
  if (path.sample_count() < 1) throw ParameterGateViolation("path record is empty");
  const int d = path.d;
  detail::EventTracker tracker;
  tracker.reset(path.times[0], path.states.data(), d);
  for (std::int64_t i = 1; i < path.sample_count(); ++i) {
    tracker.observe(path.times[static_cast<size_t>(i)],
                    path.states.data() + i * d, d);
  }
  StoppingTimes out;
  out.cone_exit = tracker.cone_exit;
  out.hit_zero = tracker.hit_zero;
  out.hit_two = tracker.hit_two;
  out.back_to_one = tracker.back_to_one;
  return out;
}

namespace detail {

double modulus_statistic(const std::vector<double>& w, const std::vector<double>& times, int d,
                         double alpha) {
  const std::int64_t n = static_cast<std::int64_t>(times.size());
  if (n < 2) return 0.0;
  const double expnt = 1.0 / (1.0 + alpha);

  // Uniform spacing lets the gap powers be tabulated once.
  const double h = (times.back() - times.front()) / static_cast<double>(n - 1);
  bool uniform = h > 0.0;
  for (std::int64_t i = 0; i + 1 < n && uniform; ++i) {
    double gap = times[static_cast<size_t>(i + 1)] - times[static_cast<size_t>(i)];
    if (std::fabs(gap - h) > 1e-9 * h) uniform = false;
  }

  double best2 = 0.0;  // squared ratio, to defer the sqrt
  if (uniform) {
    std::vector<double> inv_pow2(static_cast<size_t>(n), 0.0);
    for (std::int64_t g = 1; g < n; ++g) {
      double denom = std::pow(h * static_cast<double>(g), expnt);
      inv_pow2[static_cast<size_t>(g)] = 1.0 / (denom * denom);
    }
    for (std::int64_t i = 0; i < n; ++i) {
      const double* wi = w.data() + i * d;
      for (std::int64_t j = i + 1; j < n; ++j) {
        const double* wj = w.data() + j * d;
        double diff2 = 0.0;
        for (int k = 0; k < d; ++k) {
          double dk = wj[k] - wi[k];
          diff2 += dk * dk;
        }
        double r2 = diff2 * inv_pow2[static_cast<size_t>(j - i)];
        if (r2 > best2) best2 = r2;
      }
    }
  } else {
    for (std::int64_t i = 0; i < n; ++i) {
      const double* wi = w.data() + i * d;
      for (std::int64_t j = i + 1; j < n; ++j) {
        const double* wj = w.data() + j * d;
        double diff2 = 0.0;
        for (int k = 0; k < d; ++k) {
          double dk = wj[k] - wi[k];
          diff2 += dk * dk;
        }
        double denom = std::pow(times[static_cast<size_t>(j)] - times[static_cast<size_t>(i)],
                                expnt);
        double r2 = diff2 / (denom * denom);
        if (r2 > best2) best2 = r2;
      }
    }
  }
  return std::sqrt(best2);
}

}  // namespace detail

double noise_modulus_statistic(const particles::PathRecord& noise, double alpha) {
  const int d = noise.d;
  const std::int64_t n = noise.sample_count();
  if (n < 2) return 0.0;

  // Cumulative noise at the record times, clipped to [0, 1].
  std::vector<double> w;
  std::vector<double> times;
  w.reserve(static_cast<size_t>(n) * d);
  times.reserve(static_cast<size_t>(n));
  double acc[3] = {0.0, 0.0, 0.0};
  for (std::int64_t i = 0; i < n; ++i) {
    if (i > 0) {
      for (int k = 0; k < d; ++k) acc[k] += noise.noise[static_cast<size_t>((i - 1) * d + k)];
    }
    double t = noise.times[static_cast<size_t>(i)];
    if (t > 1.0 + 1e-12) break;
    times.push_back(t);
    for (int k = 0; k < d; ++k) w.push_back(acc[k]);
  }

  // Dyadic thinning down to the exhaustive-scan budget.
  std::int64_t stride = 1;
  while ((static_cast<std::int64_t>(times.size()) + stride - 1) / stride > (std::int64_t{1} << 12)) {
    stride *= 2;
  }
  if (stride > 1) {
    std::vector<double> w2;
    std::vector<double> t2;
    for (std::int64_t i = 0; i < static_cast<std::int64_t>(times.size()); i += stride) {
      t2.push_back(times[static_cast<size_t>(i)]);
      for (int k = 0; k < d; ++k) w2.push_back(w[static_cast<size_t>(i * d + k)]);
    }
    w.swap(w2);
    times.swap(t2);
  }
  return detail::modulus_statistic(w, times, d, alpha);
}

bool omega_n_check(const particles::PathRecord& noise, const CounterexampleParams& params) {
  const double threshold = std::pow(params.strength, 1.0 / (2.0 * (1.0 + params.alpha)));
  return noise_modulus_statistic(noise, params.alpha) <= threshold;
}

}  // namespace roughflow::cex
