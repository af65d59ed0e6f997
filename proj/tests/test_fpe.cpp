#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <random>
#include <vector>

#include "roughflow/errors.hpp"
#include "roughflow/field.hpp"
#include "roughflow/fpe.hpp"
#include "roughflow/fpe_diagnostics.hpp"
#include "roughflow/grid.hpp"

using namespace roughflow;
using fpe::GridFunction;
using fpe::GridSpec;

namespace {

/// Analytic heat solution: isotropic Gaussian whose variance grows at rate 2
/// per unit time when a = I.
double heat_gaussian(int d, double variance, const double* x) {
  double q = 0.0;
  for (int k = 0; k < d; ++k) q += x[k] * x[k];
  const double pi = 3.14159265358979323846;
  return std::pow(2.0 * pi * variance, -0.5 * d) * std::exp(-q / (2.0 * variance));
}

double inner(const GridFunction& a, const GridFunction& b) {
  double s = 0.0;
  for (size_t i = 0; i < a.values.size(); ++i) s += a.values[i] * b.values[i];
  return s * std::pow(a.grid.spacing, a.grid.d);
}

double linf_heat_error(double spacing) {
  GridSpec grid;
  grid.d = 2;
  // Wide enough that the reflected tail at the no-flux wall sits far below
  // the discretization error; at L = 3 it plateaus the comparison near 3e-4.
  grid.half_width = 4.0;
  grid.spacing = spacing;
  grid.horizon = 0.1;
  const auto phi = fpe::gaussian_density(grid, 0.5);
  const auto field = fields::constant_field(2, {0.0, 0.0, 0.0}, 1.0);
  const auto result = fpe::solve_fpe(field, phi, grid);

  const auto& last = result.snapshots.back();
  const int n = grid.cells_per_dim();
  double err = 0.0;
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) {
      const double x[2] = {grid.coord(0, i), grid.coord(1, j)};
      const double u = last.values[static_cast<size_t>(j) * n + i];
      err = std::max(err, std::fabs(u - heat_gaussian(2, 0.5 + 2.0 * 0.1, x)));
    }
  }
  return err;
}

}  // namespace

TEST_CASE("grid index round trips and geometry") {
  GridSpec grid;
  grid.d = 3;
  grid.half_width = 1.0;
  grid.spacing = 0.25;
  const int n = grid.cells_per_dim();
  CHECK(n == 8);
  CHECK(grid.cell_count() == 512);
  CHECK(grid.coord(0, 0) == doctest::Approx(-0.875));
  CHECK(grid.coord(0, n - 1) == doctest::Approx(0.875));
  CHECK(grid.stride(0) == 1);
  CHECK(grid.stride(1) == 8);
  CHECK(grid.stride(2) == 64);
  for (std::int64_t flat : {0, 7, 63, 311, 511}) {
    int idx[3];
    grid.unflatten(flat, idx);
    CHECK(grid.flatten(idx) == flat);
  }
}

TEST_CASE("grid function mass and normalization") {
  GridSpec grid;
  grid.d = 2;
  grid.half_width = 1.0;
  grid.spacing = 0.1;
  auto f = fpe::sample_on_grid(grid, [](const double*) { return 2.0; });
  CHECK(f.mass() == doctest::Approx(8.0).epsilon(1e-12));  // 2 * (2L)^2
  f.normalize_mass();
  CHECK(f.mass() == doctest::Approx(1.0).epsilon(1e-12));

  const auto g = fpe::gaussian_density(grid, 0.25);
  CHECK(g.mass() == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(g.min_value() > 0.0);
}

TEST_CASE("binary snapshot round trip is exact") {
  GridSpec grid;
  grid.d = 2;
  grid.half_width = 0.5;
  grid.spacing = 0.125;
  grid.center = {0.25, -0.5, 0.0};
  std::mt19937 gen(9);
  std::uniform_real_distribution<double> val(-1.0, 1.0);
  auto f = fpe::sample_on_grid(grid, [&](const double*) { return val(gen); }, 0.375);

  const std::string path = "roundtrip_test.bin";
  fpe::write_binary(f, path);
  const auto g = fpe::read_binary(path);
  std::remove(path.c_str());

  CHECK(g.grid.same_layout(f.grid));
  CHECK(g.time == f.time);
  REQUIRE(g.values.size() == f.values.size());
  for (size_t i = 0; i < f.values.size(); ++i) CHECK(g.values[i] == f.values[i]);
}

TEST_CASE("heat solution matches the analytic kernel and refines at second order") {
  const double coarse = linf_heat_error(0.1);
  CHECK(coarse < 1e-2);
  const double fine = linf_heat_error(0.05);
  CHECK(fine < coarse);
  CHECK(coarse / fine >= 2.5);
}

TEST_CASE("conservative march conserves mass and positivity") {
  GridSpec grid;
  grid.d = 2;
  grid.half_width = 2.0;
  grid.spacing = 0.1;
  grid.horizon = 0.5;
  const auto phi = fpe::gaussian_density(grid, 0.2);
  const auto field = fields::rotation_field(2, 1.0);
  fpe::FpeOptions options;
  options.snapshot_times = {0.1, 0.25, 0.4};
  const auto result = fpe::solve_fpe(field, phi, grid, options);

  const double m0 = phi.mass();
  for (double m : result.mass) CHECK(std::fabs(m - m0) <= 1e-10);
  for (const auto& snap : result.snapshots) CHECK(snap.min_value() >= 0.0);
}

TEST_CASE("observable march obeys the discrete maximum principle") {
  GridSpec grid;
  grid.d = 2;
  grid.half_width = 2.0;
  grid.spacing = 0.1;
  grid.horizon = 0.5;
  const auto phi = fpe::sample_on_grid(
      grid, [](const double* x) { return std::sin(3.0 * x[0]) * std::cos(2.0 * x[1]) + 0.5; });
  const auto field = fields::rotation_field(2, 1.0);
  fpe::FpeOptions options;
  options.form = fpe::EquationForm::kolmogorov;
  const auto result = fpe::solve_fpe(field, phi, grid, options);
  CHECK(result.max_sup <= phi.max_value() + 1e-12);
}

TEST_CASE("the observable step is the exact transpose of the density step") {
  GridSpec grid;
  grid.d = 2;
  grid.half_width = 1.0;
  grid.spacing = 0.1;
  const auto field = fields::rotation_field(2, 1.0);
  fpe::FvScheme scheme(field, grid);
  scheme.prepare(0.0);
  const double dt = scheme.resolve_dt(0.0);

  std::mt19937 gen(31);
  std::uniform_real_distribution<double> val(-1.0, 1.0);
  for (int pair = 0; pair < 20; ++pair) {
    GridFunction phi(grid), psi(grid);
    for (auto& v : phi.values) v = val(gen);
    for (auto& v : psi.values) v = val(gen);
    GridFunction ke_phi(grid), fpe_psi(grid);
    scheme.ke_step(phi.values, ke_phi.values, dt);
    scheme.fpe_step(psi.values, fpe_psi.values, dt);
    const double left = inner(ke_phi, psi);
    const double right = inner(phi, fpe_psi);
    CHECK(std::fabs(left - right) <= 1e-10 * std::max(1.0, std::fabs(right)));
  }
}

TEST_CASE("constant drift translates the center of mass exactly") {
  GridSpec grid;
  grid.d = 2;
  grid.half_width = 3.0;
  grid.spacing = 0.1;
  grid.horizon = 0.2;
  grid.dt = 1e-3;
  const auto phi = fpe::gaussian_density(grid, 0.3);
  const auto field = fields::constant_field(2, {0.5, 0.3, 0.0}, 1.0);
  const auto result = fpe::solve_fpe(field, phi, grid);

  const auto& last = result.snapshots.back();
  const int n = grid.cells_per_dim();
  double mx = 0.0, my = 0.0, mass = 0.0;
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) {
      const double u = last.values[static_cast<size_t>(j) * n + i];
      mx += grid.coord(0, i) * u;
      my += grid.coord(1, j) * u;
      mass += u;
    }
  }
  CHECK(mx / mass == doctest::Approx(0.5 * 0.2).epsilon(1e-3));
  CHECK(my / mass == doctest::Approx(0.3 * 0.2).epsilon(1e-3));
}

TEST_CASE("oversized explicit steps are rejected") {
  GridSpec grid;
  grid.d = 2;
  grid.half_width = 1.0;
  grid.spacing = 0.1;
  grid.horizon = 0.5;
  grid.dt = 1.0;  // far beyond the parabolic bound
  const auto phi = fpe::gaussian_density(grid, 0.2);
  const auto field = fields::constant_field(2, {0.0, 0.0, 0.0}, 1.0);
  CHECK_THROWS_AS((void)fpe::solve_fpe(field, phi, grid), CflViolation);
}

TEST_CASE("source terms add mass at the prescribed rate") {
  GridSpec grid;
  grid.d = 2;
  grid.half_width = 1.0;
  grid.spacing = 0.1;
  grid.horizon = 0.5;
  grid.dt = 1e-3;
  const auto phi = fpe::gaussian_density(grid, 0.2);
  const auto field = fields::constant_field(2, {0.0, 0.0, 0.0}, 1.0);
  fpe::FpeOptions options;
  options.source = [](double, const double*) { return 0.2; };
  const auto result = fpe::solve_fpe(field, phi, grid, options);
  // d(mass)/dt = source integral = 0.2 * (2L)^2 = 0.8.
  CHECK(result.mass.back() ==
        doctest::Approx(phi.mass() + 0.8 * grid.horizon).epsilon(1e-10));
}

TEST_CASE("level set energies of a constant state") {
  GridSpec grid;
  grid.d = 2;
  grid.half_width = 1.0;
  grid.spacing = 0.1;
  std::vector<GridFunction> snaps;
  for (int i = 0; i < 4; ++i) {
    auto f = fpe::sample_on_grid(grid, [](const double*) { return 2.0; });
    f.time = 0.25 * (i + 1);
    snaps.push_back(f);
  }
  const double vol = 4.0;   // (2L)^2
  const double span = 1.0;  // t in [0, 1]

  const auto below = fpe::energy_report(snaps, 1.5, 0.0, 0.0, 1.0);
  CHECK(below.truncation_sup == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(below.truncation_l2 == doctest::Approx(0.25 * vol * span).epsilon(1e-12));
  CHECK(below.levelset_measure == doctest::Approx(vol * span).epsilon(1e-12));

  // At or above the sup the strict level set is empty.
  const auto at = fpe::energy_report(snaps, 2.0, 0.0, 0.0, 1.0);
  CHECK(at.truncation_sup == 0.0);
  CHECK(at.truncation_l2 == 0.0);
  CHECK(at.levelset_measure == 0.0);

  // A ball restriction shrinks the measure.
  const auto ball = fpe::energy_report(snaps, 1.5, 0.5, 0.0, 1.0);
  CHECK(ball.levelset_measure < below.levelset_measure);
  CHECK(ball.levelset_measure > 0.0);
}

TEST_CASE("level cascade of a constant state vanishes above the base level") {
  GridSpec grid;
  grid.d = 2;
  grid.half_width = 1.0;
  grid.spacing = 0.1;
  std::vector<GridFunction> snaps;
  for (int i = 0; i < 3; ++i) {
    auto f = fpe::sample_on_grid(grid, [](const double*) { return 1.0; });
    f.time = 0.5 * (i + 1);
    snaps.push_back(f);
  }
  const auto report = fpe::degiorgi_sequence(snaps, 1.0, 1.0, 6);
  REQUIRE(report.levels.size() == 7);  // indices 0..6 inclusive
  CHECK(report.levels[0] == doctest::Approx(1.0).epsilon(1e-15));
  // The first level includes the state itself (k_0 = K0, sets are non-strict).
  CHECK(report.decay[0] > 0.0);
  CHECK(report.decay[1] == 0.0);
  for (size_t j = 1; j < report.decay.size(); ++j) {
    CHECK(report.decay[j] <= report.decay[j - 1]);
  }
  CHECK(report.vanished);
}

TEST_CASE("extremal iteration trace and threshold") {
  const auto report = fpe::fast_decay_check(0.25, 2.0, 2.0, 1.0, 3);
  REQUIRE(report.trace.size() == 4);
  CHECK(report.trace[0] == 0.25);
  CHECK(report.trace[1] == 0.125);
  CHECK(report.trace[2] == 0.0625);
  CHECK(report.trace[3] == 0.03125);
  CHECK(report.threshold == 0.25);  // N^{-1/eps} C^{-1/eps^2} = 1/2 * 1/2
  CHECK_FALSE(report.vanishes);     // three steps only reach 2^{-5}

  // On the threshold the trace halves forever; enough steps drive it under
  // the vanishing floor.
  CHECK(fpe::fast_decay_check(0.25, 2.0, 2.0, 1.0, 60).vanishes);
  // Below the threshold the collapse is doubly exponential.
  CHECK(fpe::fast_decay_check(0.2, 2.0, 2.0, 1.0, 20).vanishes);

  // Starting above the threshold the iteration no longer collapses.
  const auto stuck = fpe::fast_decay_check(0.5, 2.0, 2.0, 1.0, 8);
  CHECK(!stuck.vanishes);
}

TEST_CASE("stability comparison of a solution family") {
  GridSpec grid;
  grid.d = 2;
  grid.half_width = 1.0;
  grid.spacing = 0.1;
  std::vector<GridFunction> finals;
  for (double c : {1.0, 1.5, 1.75}) {
    finals.push_back(fpe::sample_on_grid(grid, [c](const double*) { return c; }));
  }
  const auto report = fpe::stability_compare(finals);
  REQUIRE(report.max_diff.size() == 2);
  CHECK(report.max_diff[0] == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(report.max_diff[1] == doctest::Approx(0.25).epsilon(1e-12));
  CHECK(report.l1_diff[0] == doctest::Approx(0.5 * 4.0).epsilon(1e-12));
}
