#pragma once

#include <array>
#include <cmath>
#include <cstdint>

namespace roughflow::rng {

/// Philox 4x32-10 counter-based generator. A block cipher over a 128-bit
/// counter keyed by 64 bits: any (key, counter) pair yields four independent
/// 32-bit words with no sequential state, so streams indexed by
/// (particle, step, draw) are reproducible regardless of evaluation order
/// or thread count.
struct PhiloxBlock {
  std::uint32_t w[4];
};

inline PhiloxBlock philox4x32(std::uint32_t c0, std::uint32_t c1, std::uint32_t c2,
                              std::uint32_t c3, std::uint32_t k0, std::uint32_t k1) {
  constexpr std::uint32_t mul0 = 0xD2511F53u;
  constexpr std::uint32_t mul1 = 0xCD9E8D57u;
  constexpr std::uint32_t weyl0 = 0x9E3779B9u;
  constexpr std::uint32_t weyl1 = 0xBB67AE85u;
  for (int round = 0; round < 10; ++round) {
    if (round > 0) {
      k0 += weyl0;
      k1 += weyl1;
    }
    std::uint64_t p0 = static_cast<std::uint64_t>(mul0) * c0;
    std::uint64_t p1 = static_cast<std::uint64_t>(mul1) * c2;
    std::uint32_t hi0 = static_cast<std::uint32_t>(p0 >> 32);
    std::uint32_t lo0 = static_cast<std::uint32_t>(p0);
    std::uint32_t hi1 = static_cast<std::uint32_t>(p1 >> 32);
    std::uint32_t lo1 = static_cast<std::uint32_t>(p1);
    std::uint32_t n0 = hi1 ^ c1 ^ k0;
    std::uint32_t n1 = lo1;
    std::uint32_t n2 = hi0 ^ c3 ^ k1;
    std::uint32_t n3 = lo0;
    c0 = n0;
    c1 = n1;
    c2 = n2;
    c3 = n3;
  }
  return PhiloxBlock{{c0, c1, c2, c3}};
}

/// Stream classes keep distinct uses of the same (particle, step) counter
/// from colliding.
enum class StreamClass : std::uint32_t {
  evolve_noise = 0,
  init_sampling = 1,
  scratch = 2,
};

/// Keyed noise source. One instance per master seed; every draw is a pure
/// function of (seed, particle, step, draw, class).
class NoiseSource {
 public:
  explicit NoiseSource(std::uint64_t seed)
      : key_lo_(static_cast<std::uint32_t>(seed)),
        key_hi_(static_cast<std::uint32_t>(seed >> 32)) {}

  std::uint64_t seed() const {
    return (static_cast<std::uint64_t>(key_hi_) << 32) | key_lo_;
  }

  PhiloxBlock block(std::uint64_t particle, std::uint32_t step, std::uint32_t draw,
                    StreamClass cls) const {
    std::uint32_t c3 = (static_cast<std::uint32_t>(cls) << 28) | (draw & 0x0FFFFFFFu);
    return philox4x32(static_cast<std::uint32_t>(particle),
                      static_cast<std::uint32_t>(particle >> 32), step, c3, key_lo_,
                      key_hi_);
  }

  /// Uniform double in the open interval (0, 1).
  double uniform(std::uint64_t particle, std::uint32_t step, std::uint32_t draw,
                 StreamClass cls) const {
    PhiloxBlock b = block(particle, step, draw, cls);
    return to_unit(compose64(b.w[0], b.w[1]));
  }

  /// Two independent standard normals via Box-Muller. Deterministic: no
  /// rejection loop, fixed draw count per call.
  void gaussian_pair(std::uint64_t particle, std::uint32_t step, std::uint32_t draw,
                     StreamClass cls, double& z0, double& z1) const {
    PhiloxBlock b = block(particle, step, draw, cls);
    double u1 = to_unit(compose64(b.w[0], b.w[1]));
    double u2 = to_unit(compose64(b.w[2], b.w[3]));
    double radius = std::sqrt(-2.0 * std::log(u1));
    double angle = 6.283185307179586476925286766559 * u2;
    z0 = radius * std::cos(angle);
    z1 = radius * std::sin(angle);
  }

 private:
  static std::uint64_t compose64(std::uint32_t hi, std::uint32_t lo) {
    return (static_cast<std::uint64_t>(hi) << 32) | lo;
  }

  /// Map 64 random bits to (0,1): 53-bit mantissa shifted to cell midpoints,
  /// so 0 and 1 are never produced and log/sqrt stay finite.
  static double to_unit(std::uint64_t bits) {
    return (static_cast<double>(bits >> 11) + 0.5) * (1.0 / 9007199254740992.0);
  }

  std::uint32_t key_lo_;
  std::uint32_t key_hi_;
};

}  // namespace roughflow::rng
