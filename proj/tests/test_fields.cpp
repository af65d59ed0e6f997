#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "roughflow/errors.hpp"
#include "roughflow/field.hpp"
#include "roughflow/lps.hpp"
#include "roughflow/ramps.hpp"
#include "roughflow/singular_drift.hpp"

using namespace roughflow;
using fields::CounterexampleParams;

namespace {

/// Central-difference oracle for one-dimensional derivatives.
double central_diff(double (*f)(double), double t, double h) {
  return (f(t + h) - f(t - h)) / (2.0 * h);
}

/// Central-difference divergence of the singular drift at x with step h.
double divergence_at(const CounterexampleParams& params, const double* x, double h) {
  // Fourth-order stencil: the ramp's higher derivatives spike near the cone
  // edges, so a second-order quotient is not accurate enough there.
  double div = 0.0;
  for (int k = 0; k < params.d; ++k) {
    double samples[4][3];
    const double offsets[4] = {-2.0 * h, -h, h, 2.0 * h};
    double bk[4];
    for (int s = 0; s < 4; ++s) {
      samples[s][0] = x[0];
      samples[s][1] = x[1];
      samples[s][2] = x[2];
      samples[s][k] += offsets[s];
      double b[3];
      fields::counterexample_drift(params, samples[s], b);
      bk[s] = b[k];
    }
    div += (bk[0] - 8.0 * bk[1] + 8.0 * bk[2] - bk[3]) / (12.0 * h);
  }
  return div;
}

double drift_norm(const CounterexampleParams& params, const double* x) {
  double b[3];
  fields::counterexample_drift(params, x, b);
  double n2 = 0.0;
  for (int k = 0; k < params.d; ++k) n2 += b[k] * b[k];
  return std::sqrt(n2);
}

}  // namespace

TEST_CASE("ramp is a smooth partition of unity") {
  CHECK(fields::ramp_e(-1.0) == 0.0);
  CHECK(fields::ramp_e(0.0) == 0.0);
  CHECK(fields::ramp_e(1.0) == doctest::Approx(std::exp(-1.0)).epsilon(1e-15));

  CHECK(fields::ramp_s(-0.5) == 0.0);
  CHECK(fields::ramp_s(0.0) == 0.0);
  CHECK(fields::ramp_s(1.0) == 1.0);
  CHECK(fields::ramp_s(2.0) == 1.0);
  CHECK(fields::ramp_s(0.5) == doctest::Approx(0.5).epsilon(1e-15));

  double prev = -1.0;
  for (int i = 0; i <= 100; ++i) {
    const double t = i / 100.0;
    const double s = fields::ramp_s(t);
    CHECK(s >= prev);  // monotone
    CHECK(fields::ramp_s(t) + fields::ramp_s(1.0 - t) == doctest::Approx(1.0).epsilon(1e-14));
    prev = s;
  }

  for (double t : {0.1, 0.3, 0.5, 0.7, 0.9}) {
    const double numeric = central_diff(&fields::ramp_s, t, 1e-6);
    CHECK(fields::ramp_s_deriv(t) == doctest::Approx(numeric).epsilon(1e-6));
  }
  CHECK(fields::ramp_s_deriv(0.0) == 0.0);
  CHECK(fields::ramp_s_deriv(1.0) == 0.0);
}

TEST_CASE("annulus profile switches between 1/2 and 1") {
  CHECK(fields::annulus_g(0.0) == 0.0);
  CHECK(fields::annulus_g(0.5) == 0.0);
  CHECK(fields::annulus_g(-0.5) == 0.0);
  CHECK(fields::annulus_g(1.0) == 1.0);
  CHECK(fields::annulus_g(-3.0) == 1.0);
  CHECK(fields::annulus_g(0.75) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(fields::annulus_g(0.6) == fields::annulus_g(-0.6));  // even

  for (double s : {0.55, 0.6, 0.75, 0.9, 0.95}) {
    const double numeric = central_diff(&fields::annulus_g, s, 1e-6);
    CHECK(fields::annulus_g_deriv(s) == doctest::Approx(numeric).epsilon(1e-5));
    CHECK(fields::annulus_g_deriv(-s) == -fields::annulus_g_deriv(s));  // odd
  }
}

TEST_CASE("cutoff, clamp, and bump profiles") {
  CHECK(fields::cutoff_chi(0.0) == 1.0);
  CHECK(fields::cutoff_chi(1.0) == 1.0);
  CHECK(fields::cutoff_chi(2.0) == 0.0);
  CHECK(fields::cutoff_chi(5.0) == 0.0);
  CHECK(fields::cutoff_chi(1.5) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(fields::cutoff_chi(-1.5) == fields::cutoff_chi(1.5));

  const double eps = 0.1;
  CHECK(fields::smooth_clamp(0.0, eps) == 0.0);
  CHECK(fields::smooth_clamp(0.03, eps) == 0.03);  // identity below eps/2
  CHECK(fields::smooth_clamp(0.05, eps) == 0.05);
  CHECK(fields::smooth_clamp(0.1, eps) == eps);  // saturated at eps
  CHECK(fields::smooth_clamp(7.0, eps) == eps);
  double prev = -1.0;
  for (int i = 0; i <= 200; ++i) {
    const double s = 0.2 * i / 200.0;
    const double v = fields::smooth_clamp(s, eps);
    CHECK(v >= prev);
    CHECK(v <= eps);
    prev = v;
  }

  CHECK(fields::bump_profile(0.0) == 1.0);
  CHECK(fields::bump_profile(0.5) == 1.0);
  CHECK(fields::bump_profile(1.0) == 0.0);
  CHECK(fields::bump_profile(-2.0) == 0.0);
  CHECK(fields::bump_profile(0.75) == doctest::Approx(0.5).epsilon(1e-15));
}

TEST_CASE("subcritical exponent bundle anchors") {
  // d/p + 2/q = 1 + 1/2 = 3/2 = 2 - e, so e = 1/2; duals p* = 2p/(p-1),
  // q* = 2q/(q-1).
  const auto lps = fields::make_lps(3, 3.0, 4.0);
  CHECK(lps.e == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(lps.p_star == doctest::Approx(3.0).epsilon(1e-15));
  CHECK(lps.q_star == doctest::Approx(8.0 / 3.0).epsilon(1e-15));
  // Dual identity d/p* + 2/q* = (d + e)/2.
  CHECK(3.0 / lps.p_star + 2.0 / lps.q_star ==
        doctest::Approx((3.0 + lps.e) / 2.0).epsilon(1e-14));

  CHECK_THROWS_AS((void)fields::make_lps(3, 2.0, 4.0), SubcriticalityViolation);  // e = 0
  CHECK_THROWS_AS((void)fields::make_lps(2, 2.0, 2.0), SubcriticalityViolation);  // e = 0
  CHECK_THROWS_AS((void)fields::make_lps(3, 10.0, 10.0), SubcriticalityViolation);  // e > 1
  CHECK_THROWS_AS((void)fields::make_lps(3, -1.0, 4.0), SubcriticalityViolation);
}

TEST_CASE("singular drift axis anchor is exact") {
  CounterexampleParams params;
  params.d = 3;
  params.alpha = 1.5;
  params.strength = 16.0;
  params.p = 1.9;  // validation is not exercised here; evaluation is direct

  // On the axis r = 0 the profile is saturated: b = (0, 0, N (d-1) h^-alpha)
  // and 0.25^-1.5 = 8 exactly in binary floating point.
  const double x[3] = {0.0, 0.0, 0.25};
  double b[3];
  fields::counterexample_drift(params, x, b);
  CHECK(b[0] == 0.0);
  CHECK(b[1] == 0.0);
  CHECK(b[2] == 256.0);

  // Below the hyperplane the vertical component flips sign exactly.
  const double xm[3] = {0.0, 0.0, -0.25};
  fields::counterexample_drift(params, xm, b);
  CHECK(b[0] == 0.0);
  CHECK(b[1] == 0.0);
  CHECK(b[2] == -256.0);
}

TEST_CASE("singular drift mirror symmetry is bitwise") {
  CounterexampleParams params;  // defaults: d=3, alpha=1.2, N=256
  std::mt19937 gen(11);
  std::uniform_real_distribution<double> coord(-2.0, 2.0);
  for (int trial = 0; trial < 10000; ++trial) {
    double x[3] = {coord(gen), coord(gen), coord(gen)};
    if (x[2] == 0.0) continue;
    double xr[3] = {x[0], x[1], -x[2]};
    double b[3], br[3];
    fields::counterexample_drift(params, x, b);
    fields::counterexample_drift(params, xr, br);
    // Lateral components even in x_d, vertical component odd, bit for bit.
    CHECK(br[0] == b[0]);
    CHECK(br[1] == b[1]);
    CHECK(br[2] == -b[2]);
  }
}

TEST_CASE("singular drift support and singular points") {
  CounterexampleParams params;
  double b[3];

  // Outside the cone r >= 2|x_d| the field vanishes identically.
  const double wide[3] = {1.0, 0.5, 0.2};  // r approx 1.12 >= 0.4
  fields::counterexample_drift(params, wide, b);
  CHECK(b[0] == 0.0);
  CHECK(b[1] == 0.0);
  CHECK(b[2] == 0.0);

  // On the hyperplane off the origin the field vanishes.
  const double flat[3] = {0.3, -0.1, 0.0};
  fields::counterexample_drift(params, flat, b);
  CHECK(b[0] == 0.0);
  CHECK(b[2] == 0.0);

  // At the origin the drift is genuinely singular: tagged non-finite.
  const double origin[3] = {0.0, 0.0, 0.0};
  fields::counterexample_drift(params, origin, b);
  CHECK(!std::isfinite(b[2]));

  // Strictly inside the cone the field is nonzero and finite.
  const double inside[3] = {0.01, 0.0, 0.5};
  fields::counterexample_drift(params, inside, b);
  CHECK(std::isfinite(b[0]));
  CHECK(b[2] > 0.0);
}

TEST_CASE("singular drift is divergence free away from the locus") {
  CounterexampleParams params;
  std::mt19937 gen(5);
  std::uniform_real_distribution<double> lateral(-1.5, 1.5);
  std::uniform_real_distribution<double> height(0.01, 1.5);
  std::bernoulli_distribution sign(0.5);
  const double h = 3e-5;
  int checked = 0;
  for (int trial = 0; trial < 400; ++trial) {
    double x[3] = {lateral(gen), lateral(gen), height(gen) * (sign(gen) ? 1.0 : -1.0)};
    const double div = divergence_at(params, x, h);
    const double scale = 1.0 + drift_norm(params, x);
    CHECK(std::fabs(div) <= 1e-4 * scale);
    ++checked;
  }
  CHECK(checked == 400);
}

TEST_CASE("parameter gates reject out-of-range values") {
  CounterexampleParams params;

  params.d = 2;
  CHECK_THROWS_AS(params.validate(), ParameterGateViolation);
  params.d = 3;
  CHECK_NOTHROW(params.validate());

  params.p = 1.2;  // below max(d/2, 2)
  CHECK_THROWS_AS(params.validate(), ParameterGateViolation);
  params.p = 3.5;  // >= d
  CHECK_THROWS_AS(params.validate(), ParameterGateViolation);
  params.p = 2.0;

  params.alpha = 1.0;  // boundary is excluded
  CHECK_THROWS_AS(params.validate(), ParameterGateViolation);
  params.alpha = 1.5;  // d/p = 1.5 boundary is excluded
  CHECK_THROWS_AS(params.validate(), ParameterGateViolation);
  params.alpha = 1.2;

  params.kappa = 1.0;
  CHECK_THROWS_AS(params.validate(), ParameterGateViolation);
  params.kappa = 5.0/3.0 + 0.01;  // (d-1)/alpha = 5/3
  CHECK_THROWS_AS(params.validate(), ParameterGateViolation);
  params.kappa = 1.3;

  params.strength = 0.0;
  CHECK_THROWS_AS(params.validate(), ParameterGateViolation);
  params.strength = 256.0;
  CHECK_NOTHROW(params.validate());

  // The alpha gate message names the violated window.
  params.alpha = 2.0;
  try {
    params.validate();
    CHECK(false);
  } catch (const ParameterGateViolation& e) {
    CHECK(std::string(e.what()).find("alpha not in (1, d/p)") != std::string::npos);
  }
}

TEST_CASE("noise modulus scale") {
  CounterexampleParams params;
  params.alpha = 1.2;
  params.strength = 256.0;
  CHECK(params.eps_n() ==
        doctest::Approx(std::pow(256.0, -1.0 / (2.0 * 2.2))).epsilon(1e-15));
}

TEST_CASE("built-in fields report their structure") {
  const auto rot = fields::rotation_field(2, 1.0);
  CHECK(rot.divergence_free);
  CHECK(rot.constant_diffusion);
  double v[3];
  const double x[3] = {0.7, -0.3, 0.0};
  rot.advective(0.0, x, v);
  CHECK(v[0] == doctest::Approx(0.3).epsilon(1e-15));
  CHECK(v[1] == doctest::Approx(0.7).epsilon(1e-15));

  const auto ou = fields::ou_linear_field(2, 2.5, 1.0);
  double b[3];
  ou.drift(0.0, x, b);
  CHECK(b[0] == doctest::Approx(-2.5 * 0.7).epsilon(1e-15));
  CHECK(b[1] == doctest::Approx(2.5 * 0.3).epsilon(1e-15));

  const auto cex = fields::counterexample_field(CounterexampleParams{});
  CHECK(cex.d == 3);
  CHECK(cex.divergence_free);
  CHECK(cex.locus.kind == fields::SingularLocus::Kind::last_axis_hyperplane);
  CHECK(cex.diffusion(0.0, x) == 0.5);  // sigma = I means a = 1/2
  CHECK(cex.sigma(0.0, x) == doctest::Approx(1.0).epsilon(1e-15));
  const double y[3] = {0.1, 0.2, -0.7};
  CHECK(cex.locus.distance(y, 3) == doctest::Approx(0.7).epsilon(1e-15));

  const auto quiet = fields::counterexample_field_noiseless(CounterexampleParams{});
  CHECK(quiet.diffusion(0.0, x) == 0.0);
  CHECK(quiet.sigma(0.0, x) == 0.0);

  // Ellipticity brackets the scalar diffusion both ways; a degenerate
  // diffusion has no elliptic lower bound, so the constant stays at 1.
  const auto small = fields::constant_field(2, {0.0, 0.0, 0.0}, 0.25);
  CHECK(small.ellipticity >= 4.0);
  const auto noiseless = fields::constant_field(2, {0.3, 0.0, 0.0}, 0.0);
  CHECK(noiseless.ellipticity == 1.0);
  CHECK(noiseless.sigma(0.0, x) == 0.0);
  CHECK(fields::rotation_field(2, 0.0).ellipticity == 1.0);
  CHECK(fields::ou_linear_field(2, 1.0, 0.0).ellipticity == 1.0);
}
