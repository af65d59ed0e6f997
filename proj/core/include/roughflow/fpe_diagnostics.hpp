#pragma once

#include <vector>

#include "roughflow/grid.hpp"

namespace roughflow::fpe {

/// Discrete level-truncation energies of a solution sequence over a time
/// window and a centered ball.
struct LevelSetEnergy {
  double level = 0.0;             // k
  double truncation_sup = 0.0;    // sup over window of max (u - k)^+
  double truncation_l2 = 0.0;     // space-time integral of ((u - k)^+)^2
  double levelset_measure = 0.0;  // space-time volume of {u > k} (strict)
};

/// Window [t_lo, t_hi] selects snapshots by their time stamps; ball_radius
/// <= 0 means the whole box, otherwise cells with |x| <= ball_radius from
/// the coordinate origin. Snapshots are weighted uniformly by
/// (t_hi - t_lo) / count, so the outputs are discrete space-time integrals.
LevelSetEnergy energy_report(const std::vector<GridFunction>& solution, double level,
                             double ball_radius, double t_lo, double t_hi);

/// Level cascade k_j = multiplier * base_level * (2 - 2^-j) with the
/// space-time measures y_j of the non-strict super-level sets {u >= k_j}.
struct DeGiorgiReport {
  double base_level = 0.0;  // K0
  double multiplier = 0.0;  // N_dg
  std::vector<double> levels;
  std::vector<double> decay;  // y_j, nonincreasing in j
  bool vanished = false;      // y at the last level is exactly zero
};

DeGiorgiReport degiorgi_sequence(const std::vector<GridFunction>& solution, double base_level,
                                 double multiplier, int level_count);

/// Extremal iteration y_{j+1} = N C^j y_j^(1+eps) together with the
/// smallness threshold N^(-1/eps) C^(-1/eps^2) that separates collapse from
/// blow-up.
struct FastDecayReport {
  std::vector<double> trace;  // y_0 .. y_steps
  double threshold = 0.0;
  bool vanishes = false;
};

FastDecayReport fast_decay_check(double y0, double n_factor, double c_factor, double eps,
                                 int steps);

/// Consecutive-difference table across a family of solutions on one shared
/// grid (e.g. runs at increasing mollification levels).
struct StabilityReport {
  std::vector<double> max_diff;  // sup norm of u_{i+1} - u_i
  std::vector<double> l1_diff;   // integral of |u_{i+1} - u_i|
};

StabilityReport stability_compare(const std::vector<GridFunction>& finals);

}  // namespace roughflow::fpe
