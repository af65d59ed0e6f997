#include "roughflow/lps.hpp"

#include <string>

namespace roughflow::fields {

LpsExponents make_lps(int d, double p, double q) {
  if (d < 1) throw SubcriticalityViolation("dimension must be positive, got " + std::to_string(d));
  if (!(p > 1.0) || !(q > 1.0)) {
    throw SubcriticalityViolation("exponents must exceed 1, got p=" + std::to_string(p) +
                                  " q=" + std::to_string(q));
  }
  double e = 2.0 - static_cast<double>(d) / p - 2.0 / q;
  if (!(e > 0.0) || !(e < 1.0)) {
    throw SubcriticalityViolation("margin e = 2 - d/p - 2/q = " + std::to_string(e) +
                                  " outside (0,1) for d=" + std::to_string(d) +
                                  " p=" + std::to_string(p) + " q=" + std::to_string(q));
  }
  LpsExponents out;
  out.d = d;
  out.p = p;
  out.q = q;
  out.e = e;
  out.p_star = 2.0 * p / (p - 1.0);
  out.q_star = 2.0 * q / (q - 1.0);
  return out;
}

}  // namespace roughflow::fields
