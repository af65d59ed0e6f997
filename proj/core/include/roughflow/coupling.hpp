#pragma once

#include <cstdint>
#include <vector>

#include "roughflow/ensemble.hpp"
#include "roughflow/field.hpp"

namespace roughflow::particles {

/// Smoothed separation functional Phi_eps(z) = log(1 + phi_eps(|z|^2)/eps^2)
/// where phi_eps is the smooth clamp: identity below eps/2, constant eps
/// above eps.
double coupling_phi(double eps, const double* z, int d);

/// Two ensembles driven by one noise realization, tracked through the mean
/// smoothed separation.
struct CouplingDiagnostics {
  double epsilon = 0.0;
  double radius = 0.0;                  // R of the joint exit time tau_R
  std::vector<double> times;            // per macro step
  std::vector<double> phi_bar;          // mean Phi_eps(Z_t), Z frozen at tau_R
  double exit_fraction = 0.0;           // pairs stopped by tau_R within the horizon
  double max_abs_z = 0.0;               // sup over pairs and times of |Z|
};

/// Evolves the pair (X from starts_x under field_x, Y from starts_y under
/// field_y) in lockstep with identical Brownian increments; requires both
/// ensembles to share seed and substreams so the draws coincide. Pairs stop
/// at tau_R = first time both copies are outside the ball of the given
/// radius. Substepping is disabled so the two copies stay draw-aligned.
CouplingDiagnostics coupling_diagnostic(const fields::CoefficientField& field_x,
                                        const fields::CoefficientField& field_y,
                                        const ParticleEnsemble& starts_x,
                                        const ParticleEnsemble& starts_y, double eps,
                                        double radius, double dt, double horizon,
                                        int threads = 1);

}  // namespace roughflow::particles
