#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <set>
#include <vector>

#include "roughflow/coupling.hpp"
#include "roughflow/ensemble.hpp"
#include "roughflow/errors.hpp"
#include "roughflow/evolve.hpp"
#include "roughflow/field.hpp"
#include "roughflow/histogram.hpp"
#include "roughflow/krylov.hpp"
#include "roughflow/mollify.hpp"
#include "roughflow/singular_drift.hpp"
#include "roughflow/superposition.hpp"

using namespace roughflow;
using particles::ParticleEnsemble;

namespace {

/// Drift-only field with zero diffusion for exact-trajectory oracles.
fields::CoefficientField pure_drift(int d, double bx, double by) {
  fields::CoefficientField field;
  field.d = d;
  field.name = "pure-drift";
  field.drift = [bx, by](double, const double*, double* b) {
    b[0] = bx;
    b[1] = by;
    b[2] = 0.0;
  };
  field.diffusion = [](double, const double*) { return 0.0; };
  field.ellipticity = 1.0;
  field.constant_diffusion = true;
  return field;
}

}  // namespace

TEST_CASE("point ensembles satisfy the container invariants") {
  const auto ens = particles::delta_ensemble({0.5, -0.25, 0.0}, 2, 1000, 7);
  CHECK(ens.d == 2);
  CHECK(ens.count() == 1000);
  CHECK_NOTHROW(ens.validate());
  double total = 0.0;
  std::set<std::uint64_t> streams;
  for (std::int64_t p = 0; p < ens.count(); ++p) {
    CHECK(ens.position(p)[0] == 0.5);
    CHECK(ens.position(p)[1] == -0.25);
    total += ens.weights[static_cast<size_t>(p)];
    streams.insert(ens.substream[static_cast<size_t>(p)]);
  }
  CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(streams.size() == 1000);
}

TEST_CASE("density sampling is deterministic and matches the density's moments") {
  fpe::GridSpec grid;
  grid.d = 2;
  grid.half_width = 2.0;
  grid.spacing = 0.1;
  const auto density = fpe::gaussian_density(grid, 0.4);

  const auto a = particles::sample_from_density(density, 20000, 3);
  const auto b = particles::sample_from_density(density, 20000, 3);
  REQUIRE(a.count() == b.count());
  for (size_t i = 0; i < a.positions.size(); ++i) CHECK(a.positions[i] == b.positions[i]);

  const auto c = particles::sample_from_density(density, 20000, 4);
  CHECK(c.positions != a.positions);

  double mean = 0.0, second = 0.0;
  for (std::int64_t p = 0; p < a.count(); ++p) {
    mean += a.position(p)[0];
    second += a.position(p)[0] * a.position(p)[0];
    CHECK(std::fabs(a.position(p)[0]) <= 2.0);
    CHECK(std::fabs(a.position(p)[1]) <= 2.0);
  }
  mean /= static_cast<double>(a.count());
  second /= static_cast<double>(a.count());
  const double se = std::sqrt(0.4 / 20000.0);
  CHECK(std::fabs(mean) < 4.0 * se);
  // Cell quantization adds h^2/12 to the axis variance.
  CHECK(second == doctest::Approx(0.4 + 0.01 / 12.0).epsilon(0.05));
}

TEST_CASE("driftless evolution reproduces Brownian moments") {
  const auto field = fields::constant_field(1, {0.0, 0.0, 0.0}, 0.5);  // sigma = 1
  const auto start = particles::delta_ensemble({0.0, 0.0, 0.0}, 1, 20000, 12);
  particles::EvolveOptions options;
  options.dt = 1e-3;
  options.horizon = 0.25;
  const auto result = particles::evolve(start, field, options);

  CHECK(result.ensemble.time == doctest::Approx(0.25).epsilon(1e-12));
  CHECK(result.newly_frozen == 0);
  double mean = 0.0, second = 0.0;
  for (std::int64_t p = 0; p < result.ensemble.count(); ++p) {
    const double x = result.ensemble.position(p)[0];
    mean += x;
    second += x * x;
  }
  const double m = static_cast<double>(result.ensemble.count());
  mean /= m;
  second /= m;
  // Var = 2 a t = 0.25; SE of the variance estimate is var * sqrt(2/m).
  CHECK(std::fabs(mean) < 3.0 * std::sqrt(0.25 / m));
  CHECK(std::fabs(second - 0.25) < 3.0 * 0.25 * std::sqrt(2.0 / m));
}

TEST_CASE("drift-only evolution is the exact tamed recursion") {
  const auto field = pure_drift(2, 1.0, -2.0);
  const auto start = particles::delta_ensemble({0.1, 0.2, 0.0}, 2, 3, 99);
  particles::EvolveOptions options;
  options.dt = 0.01;
  options.horizon = 1.0;
  const auto result = particles::evolve(start, field, options);

  // |b| dt = sqrt(5) / 100 < 0.1: single substep per macro step, increment
  // dt b / (1 + dt |b|) repeated 100 times.
  const double speed = std::sqrt(5.0);
  double x = 0.1, y = 0.2;
  for (int k = 0; k < 100; ++k) {
    x += 0.01 * 1.0 / (1.0 + 0.01 * speed);
    y += 0.01 * -2.0 / (1.0 + 0.01 * speed);
  }
  for (std::int64_t p = 0; p < 3; ++p) {
    CHECK(result.ensemble.position(p)[0] == x);
    CHECK(result.ensemble.position(p)[1] == y);
  }
}

TEST_CASE("recorded paths carry matching times, states, and noise") {
  const auto field = fields::constant_field(2, {0.2, 0.0, 0.0}, 1.0);
  const auto start = particles::delta_ensemble({0.0, 0.0, 0.0}, 2, 5, 21);
  particles::EvolveOptions options;
  options.dt = 0.01;
  options.horizon = 0.1;
  options.record = true;
  options.record_limit = 2;
  const auto result = particles::evolve(start, field, options);

  REQUIRE(result.records.size() == 2);
  for (const auto& rec : result.records) {
    CHECK(rec.d == 2);
    REQUIRE(rec.times.size() >= 11);  // substepping may refine, never coarsen
    CHECK(rec.times.front() == 0.0);
    CHECK(rec.times.back() == doctest::Approx(0.1).epsilon(1e-12));
    CHECK(rec.states.size() == rec.times.size() * 2);
    CHECK(rec.noise.size() == (rec.times.size() - 1) * 2);
    CHECK(rec.states[0] == 0.0);
  }
}

TEST_CASE("mirrored noise with mirrored starts reflects paths bitwise") {
  const auto field = fields::counterexample_field(fields::CounterexampleParams{});
  const auto up = particles::delta_ensemble({0.0, 0.0, 0.05}, 3, 50, 5);
  const auto down = particles::delta_ensemble({0.0, 0.0, -0.05}, 3, 50, 5);

  particles::EvolveOptions options;
  options.dt = 1.0 / 256.0;
  options.horizon = 0.5;
  const auto plain = particles::evolve(up, field, options);
  options.mirror_noise_axis = true;
  const auto mirrored = particles::evolve(down, field, options);

  for (std::int64_t p = 0; p < 50; ++p) {
    CHECK(mirrored.ensemble.position(p)[0] == plain.ensemble.position(p)[0]);
    CHECK(mirrored.ensemble.position(p)[1] == plain.ensemble.position(p)[1]);
    CHECK(mirrored.ensemble.position(p)[2] == -plain.ensemble.position(p)[2]);
    CHECK(mirrored.ensemble.frozen[static_cast<size_t>(p)] ==
          plain.ensemble.frozen[static_cast<size_t>(p)]);
  }
}

TEST_CASE("noiseless particles on the singular locus freeze") {
  const auto field = fields::counterexample_field_noiseless(fields::CounterexampleParams{});
  const auto start = particles::delta_ensemble({0.3, 0.0, 0.0}, 3, 4, 8);
  particles::EvolveOptions options;
  options.dt = 0.01;
  options.horizon = 0.1;
  const auto result = particles::evolve(start, field, options);
  CHECK(result.newly_frozen == 4);
  for (std::int64_t p = 0; p < 4; ++p) {
    CHECK(result.ensemble.frozen[static_cast<size_t>(p)] == 1);
    CHECK(result.ensemble.position(p)[2] == 0.0);  // froze in place
  }
}

TEST_CASE("histograms are densities with overflow accounting") {
  fpe::GridSpec grid;
  grid.d = 2;
  grid.half_width = 1.0;
  grid.spacing = 0.5;  // 4 x 4 cells

  ParticleEnsemble ens;
  ens.d = 2;
  ens.seed = 1;
  ens.positions = {0.25, 0.25,   // cell (2, 2)
                   0.3, 0.3,     // same cell
                   -0.7, 0.7,    // cell (0, 3)
                   5.0, 0.0};    // outside
  ens.weights = {0.25, 0.25, 0.25, 0.25};
  ens.substream = {0, 1, 2, 3};
  ens.frozen = {0, 0, 0, 0};

  const auto hist = particles::density_histogram(ens, grid);
  CHECK(hist.overflow_weight == doctest::Approx(0.25).epsilon(1e-15));
  CHECK(hist.density.mass() == doctest::Approx(0.75).epsilon(1e-12));
  int idx_a[3] = {2, 2, 0};
  int idx_b[3] = {0, 3, 0};
  CHECK(hist.density.values[static_cast<size_t>(grid.flatten(idx_a))] ==
        doctest::Approx(0.5 / 0.25).epsilon(1e-12));
  CHECK(hist.density.values[static_cast<size_t>(grid.flatten(idx_b))] ==
        doctest::Approx(0.25 / 0.25).epsilon(1e-12));
}

TEST_CASE("grid and particle marginals stay close and runs are reproducible") {
  fpe::GridSpec grid;
  grid.d = 2;
  grid.half_width = 2.0;
  grid.spacing = 0.1;
  grid.horizon = 0.2;
  const auto phi = fpe::gaussian_density(grid, 0.2);
  const auto field = fields::constant_field(2, {0.0, 0.0, 0.0}, 1.0);

  const auto a = particles::superposition_check(field, phi, grid, 5000, 1e-3, {0.1}, 42);
  const auto b = particles::superposition_check(field, phi, grid, 5000, 1e-3, {0.1}, 42);
  REQUIRE(a.l1_discrepancy.size() == 1);
  CHECK(a.l1_discrepancy[0] == b.l1_discrepancy[0]);  // bitwise rerun
  CHECK(a.l1_discrepancy[0] < 0.6);                   // coarse ensemble, loose band
  // Diffused mass past the box edge: about 0.4 percent at variance 0.4.
  CHECK(a.overflow[0] <= 0.02);
  CHECK(a.fpe_dt == doctest::Approx(1e-3).epsilon(1e-15));

  const auto c = particles::superposition_check(field, phi, grid, 5000, 1e-3, {0.1}, 43);
  CHECK(c.l1_discrepancy[0] != a.l1_discrepancy[0]);
}

TEST_CASE("noiseless constant drift isolates the upwind smearing error") {
  // With zero diffusion the particle side translates the start exactly, so
  // the discrepancy is the advection scheme's own numerical diffusion plus
  // a sampling floor well below it. Halving the spacing must shrink it.
  const auto field = fields::constant_field(2, {1.0, 0.0, 0.0}, 0.0);
  auto run = [&](double spacing) {
    fpe::GridSpec grid;
    grid.d = 2;
    grid.half_width = 1.6;
    grid.spacing = spacing;
    grid.horizon = 0.25;
    auto phi = fpe::gaussian_density(grid, 0.09);
    phi.normalize_mass();
    const auto report =
        particles::superposition_check(field, phi, grid, 100000, 1e-3, {0.25}, 17);
    return report.l1_discrepancy[0];
  };
  const double coarse = run(0.2);
  const double fine = run(0.1);
  CHECK(coarse < 0.4);
  CHECK(fine < 0.75 * coarse);
}

TEST_CASE("occupation scaling is exactly linear for the unit observable") {
  const auto field = fields::rotation_field(2, 1.0);
  const auto one = [](double, const double*) { return 1.0; };
  const auto report = particles::krylov_scaling(field, one, {0.5, 0.0, 0.0},
                                                {0.125, 0.25, 0.5, 1.0}, 100, 1e-3, 17);
  REQUIRE(report.windows.size() == 4);
  for (size_t i = 0; i < report.windows.size(); ++i) {
    CHECK(report.estimates[i] == report.windows[i]);  // bitwise
  }
  CHECK(report.theta_hat == 1.0);
}

TEST_CASE("degenerate occupation fits are rejected") {
  const auto field = fields::rotation_field(2, 1.0);
  const auto zero = [](double, const double*) { return 0.0; };
  CHECK_THROWS_AS((void)particles::krylov_scaling(field, zero, {0.5, 0.0, 0.0},
                                                  {0.25, 0.5}, 10, 1e-3, 17),
                  DegenerateFit);
  const auto one = [](double, const double*) { return 1.0; };
  CHECK_THROWS_AS((void)particles::krylov_scaling(field, one, {0.5, 0.0, 0.0}, {0.25}, 10,
                                                  1e-3, 17),
                  DegenerateFit);
}

TEST_CASE("identical copies under one noise never separate") {
  const auto field = fields::ou_linear_field(2, 1.0, 1.0);
  const auto starts = particles::delta_ensemble({0.5, 0.5, 0.0}, 2, 200, 33);
  const auto report =
      particles::coupling_diagnostic(field, field, starts, starts, 0.1, 50.0, 1e-3, 0.2);
  CHECK(report.max_abs_z == 0.0);
  for (double v : report.phi_bar) CHECK(v == 0.0);
  CHECK(report.exit_fraction == 0.0);
}

TEST_CASE("separation functional spot values") {
  const double za[2] = {0.05, 0.0};
  CHECK(particles::coupling_phi(0.1, za, 2) ==
        doctest::Approx(std::log(1.25)).epsilon(1e-12));
  const double zb[2] = {0.5, 0.0};  // |z|^2 = 0.25 >= eps: clamp saturates
  CHECK(particles::coupling_phi(0.1, zb, 2) ==
        doctest::Approx(std::log(11.0)).epsilon(1e-12));
  const double zc[2] = {0.0, 0.0};
  CHECK(particles::coupling_phi(0.1, zc, 2) == 0.0);
}

TEST_CASE("a mollified twin stays close under shared noise") {
  const auto field = fields::ou_linear_field(2, 1.0, 1.0);
  fields::MollifierSpec spec;
  spec.level = 8;
  spec.points_per_radius = 4;
  const auto smooth = fields::mollify(field, spec);
  const auto starts = particles::delta_ensemble({0.5, 0.0, 0.0}, 2, 20, 11);
  const auto report =
      particles::coupling_diagnostic(field, smooth, starts, starts, 0.1, 50.0, 1e-3, 0.1);
  // Affine drifts are fixed points of smoothing, so the copies track to
  // quadrature precision.
  CHECK(report.max_abs_z <= 1e-8);
}
