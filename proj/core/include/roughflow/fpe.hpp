#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "roughflow/field.hpp"
#include "roughflow/grid.hpp"

namespace roughflow::fpe {

enum class EquationForm {
  conservative,  // d_t u = div(a grad u) - div(V u), the density evolution
  kolmogorov     // the exact discrete transpose, evolving observables
};

/// Time-step bounds for the explicit scheme on a prepared field/grid pair.
struct SchemeBounds {
  double dt_formula = 0.0;   // 0.9 * min(h^2/(2 d Lambda), h / max|V|)
  double dt_monotone = 0.0;  // largest dt keeping every diagonal coefficient >= 0
  double max_speed = 0.0;    // max face |V| after the singular-locus cap

  double admissible() const { return dt_formula < dt_monotone ? dt_formula : dt_monotone; }
};

/// Explicit finite-volume scheme: central diffusive flux with arithmetic
/// face averages of a, first-order upwind advection on V = b - grad a, and
/// no-flux outer faces. The update is assembled in the grouped monotone form
///   u_new[c] = u[c] * (1 - dt * D[c]) + dt * (nonnegative neighbor inflow)
/// so nonnegative data stays nonnegative exactly in floating point whenever
/// dt * D[c] <= 1. The Kolmogorov step is the exact matrix transpose of the
/// conservative step built from the same coefficient arrays.
///
/// Faces within one spacing of a declared singular locus use the capped
/// velocity sign(V) * min(|V|, 1/h).
class FvScheme {
 public:
  FvScheme(const fields::CoefficientField& field, const GridSpec& grid);

  /// Builds (or rebuilds) face coefficients for time t. Autonomous fields
  /// build once; time-dependent fields rebuild when t changes.
  void prepare(double t);

  const SchemeBounds& bounds() const { return bounds_; }
  const GridSpec& grid() const { return grid_; }

  /// Resolves a requested step against the stability bounds: requested <= 0
  /// picks the automatic step, an oversized request throws CflViolation.
  double resolve_dt(double requested) const;

  /// One explicit step of the conservative form. in and out must both have
  /// cell_count() entries; in != out.
  void fpe_step(const std::vector<double>& in, std::vector<double>& out, double dt,
                int threads = 1) const;

  /// One explicit step of the transposed (Kolmogorov) form.
  void ke_step(const std::vector<double>& in, std::vector<double>& out, double dt,
               int threads = 1) const;

  /// Suppressed outward advective flux at the no-flux boundary for the given
  /// state: the mass per unit time that would leave an open box. This is the
  /// truncation-error monitor.
  double boundary_outflow_rate(const std::vector<double>& u) const;

 private:
  const fields::CoefficientField* field_;
  GridSpec grid_;
  int n_ = 0;
  std::int64_t cells_ = 0;
  double prepared_time_ = 0.0;
  bool built_ = false;
  SchemeBounds bounds_;
  // Interior-face coefficient arrays per axis, indexed by the lower cell of
  // the face; entries on the last layer of an axis are zero (no face).
  std::vector<double> diff_[3];  // a_face / h^2
  std::vector<double> vp_[3];    // max(V_face, 0) / h
  std::vector<double> vm_[3];    // min(V_face, 0) / h
  std::vector<double> dcoef_;    // D[c]: total outflow coefficient per cell
  // Boundary faces for the outflow monitor: cell index and outward V+.
  std::vector<std::int64_t> bdry_cell_;
  std::vector<double> bdry_vout_;

  void build(double t);
};

/// Request for solve_fpe.
struct FpeOptions {
  EquationForm form = EquationForm::conservative;
  std::vector<double> snapshot_times;  // must lie in [0, T]; final time always emitted last
  std::function<double(double, const double*)> source;  // optional source term f(t, x)
  int threads = 1;
  bool track_boundary = true;
};

struct FpeResult {
  std::vector<GridFunction> snapshots;      // one per requested time, then the final state
  std::vector<double> mass;                 // cell-sum * h^d per snapshot
  std::vector<double> boundary_layer_mass;  // mass in the outermost cell layer per snapshot
  double dt = 0.0;
  std::int64_t steps = 0;
  double max_sup = 0.0;             // max over all steps of ||u||_inf
  double suppressed_outflow = 0.0;  // time-integrated boundary_outflow_rate
};

/// Marches the explicit scheme from phi at t=0 to t=grid.horizon with
/// grid.dt (or the automatic stable step when grid.dt == 0). Throws
/// CflViolation for an oversized explicit step and NonFiniteState if the
/// solution stops being finite.
FpeResult solve_fpe(const fields::CoefficientField& field, const GridFunction& phi,
                    const GridSpec& grid, const FpeOptions& options = {});

}  // namespace roughflow::fpe
