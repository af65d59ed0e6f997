#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdint>
#include <vector>

#include "roughflow/philox.hpp"

using roughflow::rng::NoiseSource;
using roughflow::rng::PhiloxBlock;
using roughflow::rng::philox4x32;
using roughflow::rng::StreamClass;

namespace {

bool blocks_equal(const PhiloxBlock& a, const PhiloxBlock& b) {
  return a.w[0] == b.w[0] && a.w[1] == b.w[1] && a.w[2] == b.w[2] && a.w[3] == b.w[3];
}

}  // namespace

// Published known-answer vectors for the 10-round 4x32 cipher, reproduced
// independently from the algorithm definition before this suite was written.
TEST_CASE("philox known answer vectors") {
  const PhiloxBlock zero = philox4x32(0u, 0u, 0u, 0u, 0u, 0u);
  CHECK(zero.w[0] == 0x6627e8d5u);
  CHECK(zero.w[1] == 0xe169c58du);
  CHECK(zero.w[2] == 0xbc57ac4cu);
  CHECK(zero.w[3] == 0x9b00dbd8u);

  const std::uint32_t ones = 0xffffffffu;
  const PhiloxBlock top = philox4x32(ones, ones, ones, ones, ones, ones);
  CHECK(top.w[0] == 0x408f276du);
  CHECK(top.w[1] == 0x41c83b0eu);
  CHECK(top.w[2] == 0xa20bc7c6u);
  CHECK(top.w[3] == 0x6d5451fdu);

  const PhiloxBlock pi = philox4x32(0x243f6a88u, 0x85a308d3u, 0x13198a2eu, 0x03707344u,
                                    0xa4093822u, 0x299f31d0u);
  CHECK(pi.w[0] == 0xd16cfe09u);
  CHECK(pi.w[1] == 0x94fdccebu);
  CHECK(pi.w[2] == 0x5001e420u);
  CHECK(pi.w[3] == 0x24126ea1u);
}

TEST_CASE("counter layout separates particle, step, draw, and class") {
  const NoiseSource noise(0x1234abcd5678ef00ull);

  // The block call is the documented pure function of the counter words.
  const std::uint64_t particle = 0x00000002'00000001ull;
  const PhiloxBlock direct = philox4x32(0x00000001u, 0x00000002u, 7u,
                                        (2u << 28) | 5u, 0x5678ef00u, 0x1234abcdu);
  CHECK(blocks_equal(noise.block(particle, 7u, 5u, StreamClass::scratch), direct));

  // Any single index change produces a different block.
  const PhiloxBlock base = noise.block(1, 1, 1, StreamClass::evolve_noise);
  CHECK(!blocks_equal(base, noise.block(2, 1, 1, StreamClass::evolve_noise)));
  CHECK(!blocks_equal(base, noise.block(1, 2, 1, StreamClass::evolve_noise)));
  CHECK(!blocks_equal(base, noise.block(1, 1, 2, StreamClass::evolve_noise)));
  CHECK(!blocks_equal(base, noise.block(1, 1, 1, StreamClass::init_sampling)));
  CHECK(!blocks_equal(base, NoiseSource(99).block(1, 1, 1, StreamClass::evolve_noise)));

  // Same indices, same block: draws are stateless.
  CHECK(blocks_equal(base, noise.block(1, 1, 1, StreamClass::evolve_noise)));
}

TEST_CASE("uniform draws stay in the open unit interval") {
  const NoiseSource noise(2026);
  double sum = 0.0;
  const int n = 100000;
  for (int i = 0; i < n; ++i) {
    const double u = noise.uniform(static_cast<std::uint64_t>(i), 0, 0,
                                   StreamClass::init_sampling);
    REQUIRE(u > 0.0);
    REQUIRE(u < 1.0);
    sum += u;
  }
  // Mean of n uniforms: SD = 1/sqrt(12 n).
  const double se = 1.0 / std::sqrt(12.0 * n);
  CHECK(std::fabs(sum / n - 0.5) < 3.0 * se);
}

TEST_CASE("gaussian pairs have standard moments") {
  const NoiseSource noise(7);
  const int n = 100000;
  double sum = 0.0, sumsq = 0.0, cross = 0.0;
  for (int i = 0; i < n; ++i) {
    double z0 = 0.0, z1 = 0.0;
    noise.gaussian_pair(static_cast<std::uint64_t>(i), 3, 1, StreamClass::evolve_noise, z0, z1);
    REQUIRE(std::isfinite(z0));
    REQUIRE(std::isfinite(z1));
    sum += z0 + z1;
    sumsq += z0 * z0 + z1 * z1;
    cross += z0 * z1;
  }
  const int m = 2 * n;
  CHECK(std::fabs(sum / m) < 3.0 / std::sqrt(static_cast<double>(m)));
  // Var(z^2) = 2 for a standard normal.
  CHECK(std::fabs(sumsq / m - 1.0) < 3.0 * std::sqrt(2.0 / m));
  // The Box-Muller pair is uncorrelated.
  CHECK(std::fabs(cross / n) < 3.0 / std::sqrt(static_cast<double>(n)));
}

TEST_CASE("gaussian pairs are reproducible and distinct across draws") {
  const NoiseSource noise(42);
  double a0, a1, b0, b1, c0, c1;
  noise.gaussian_pair(10, 20, 30, StreamClass::evolve_noise, a0, a1);
  noise.gaussian_pair(10, 20, 30, StreamClass::evolve_noise, b0, b1);
  CHECK(a0 == b0);
  CHECK(a1 == b1);
  noise.gaussian_pair(10, 20, 31, StreamClass::evolve_noise, c0, c1);
  CHECK(a0 != c0);
}
