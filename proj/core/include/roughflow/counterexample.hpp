#pragma once

#include <vector>

#include "roughflow/ensemble.hpp"
#include "roughflow/singular_drift.hpp"

namespace roughflow::cex {

using fields::CounterexampleParams;

/// Strict cone test: x_d > aperture * r with r the lateral radius. Points on
/// the boundary (including the origin) are outside.
bool cone_membership(const double* x, int d, double aperture);

/// Vertical skeleton of the singular drift on the symmetry axis: with the
/// noise switched off and the path on the axis, the height solves
/// dy/dt = N (d-1) y^{-alpha}. Separable, so the exact solution is
/// y(t) = (y0^{1+alpha} + N (d-1)(1+alpha) t)^{1/(1+alpha)}.
struct SkeletonSolution {
  double start_height = 0.0;
  double step_horizon = 0.0;  ///< t_x = y0^{1+alpha} / N
  std::vector<double> times;
  std::vector<double> heights;   ///< strictly increasing, heights[0] = y0
  double max_rel_error = 0.0;    ///< RK4 nodes against the closed form
};

/// Exact solution of the skeleton equation.
double skeleton_closed_form(const CounterexampleParams& params, double y0, double t);

/// Height multiplier over one step horizon t_x:
/// y(t_x) / y0 = (1 + (d-1)(1+alpha))^{1/(1+alpha)}, independent of y0 and N.
double growth_factor(const CounterexampleParams& params);

/// Time at which the skeleton started at y0 < 2 reaches height 2:
/// (2^{1+alpha} - y0^{1+alpha}) / (N (d-1)(1+alpha)).
double sigma_hit_time(const CounterexampleParams& params, double y0);

/// Envelopes for the drift part y_t of a noisy height when the driving noise
/// obeys the modulus bound: the skeleton rate picks up a (1 -+ eps_N)^{-alpha}
/// factor, eps_N = params.eps_n().
double skeleton_envelope_lower(const CounterexampleParams& params, double y0, double t);
double skeleton_envelope_upper(const CounterexampleParams& params, double y0, double t);

/// Classical RK4 integration of the skeleton equation on [0, t_end] with the
/// closed form recorded as a per-node cross-check. Requires y0 > 0.
SkeletonSolution skeleton_solve(const CounterexampleParams& params, double y0, double t_end,
                                int steps = 65536);

/// Odd bounded observable of the height: f(y) = sgn(y) g(|y|) with g the
/// annulus ramp, so f vanishes for |y| <= 1/2 and is +-1 for |y| >= 1.
/// Exactly odd in floating point: f(-y) == -f(y) bitwise.
double height_observable(double y);

struct FunctionalValue {
  double value = 0.0;       ///< trapezoid of e^{-t} f((omega_t)_d) over the samples
  double tail_bound = 0.0;  ///< e^{-t_last}, bound on the discarded tail
};

/// Discounted odd functional of a sampled path, integrated over the recorded
/// window clipped to [0, t_max].
FunctionalValue path_functional(const particles::PathRecord& path, double t_max);

/// First-crossing times of a sampled path, linearly interpolated between
/// samples; NaN marks an event that never occurs in the record. An event
/// already true at the first sample reports the first sample time.
struct StoppingTimes {
  double cone_exit = 0.0;    ///< leaves {x_d > r}
  double hit_zero = 0.0;     ///< height reaches 0
  double hit_two = 0.0;      ///< height reaches 2
  double back_to_one = 0.0;  ///< first time after hit_two with height <= 1

  bool has_cone_exit() const;
  bool has_hit_zero() const;
  bool has_hit_two() const;
  bool has_back_to_one() const;
};

StoppingTimes detect_stopping_times(const particles::PathRecord& path);

namespace detail {

/// Incremental first-crossing detector fed one path node at a time; the
/// record-based detector and the streaming experiment share it. Absent
/// events stay NaN.
struct EventTracker {
  double prev_t = 0.0;
  double prev_xd = 0.0;
  double prev_phi = 0.0;  // x_d - r, positive strictly inside the unit cone
  double cone_exit = 0.0;
  double hit_zero = 0.0;
  double hit_two = 0.0;
  double back_to_one = 0.0;

  void reset(double t0, const double* x, int d);
  void observe(double t, const double* x, int d);
};

double modulus_statistic(const std::vector<double>& w, const std::vector<double>& times, int d,
                         double alpha);

}  // namespace detail

/// Max over sample pairs of |W_s - W_t| / |s - t|^{1/(1+alpha)} for the
/// cumulative noise of a record, restricted to times in [0, 1]. All pairs are
/// scanned for up to 2^12 samples; denser records are thinned dyadically
/// first.
double noise_modulus_statistic(const particles::PathRecord& noise, double alpha);

/// Modulus statistic against the threshold N^{1/(2(1+alpha))}.
bool omega_n_check(const particles::PathRecord& noise, const CounterexampleParams& params);

}  // namespace roughflow::cex
