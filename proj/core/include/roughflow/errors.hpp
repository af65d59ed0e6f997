#pragma once

#include <stdexcept>
#include <string>

namespace roughflow {

/// Exponent triple outside the strict subcritical window.
struct SubcriticalityViolation : std::runtime_error {
  explicit SubcriticalityViolation(const std::string& msg) : std::runtime_error(msg) {}
};

/// Mollification target not enclosed with the required 1/n margin.
struct MarginTooSmall : std::runtime_error {
  explicit MarginTooSmall(const std::string& msg) : std::runtime_error(msg) {}
};

/// Parameter outside an admissibility gate (alpha, kappa, p, d).
struct ParameterGateViolation : std::invalid_argument {
  explicit ParameterGateViolation(const std::string& msg) : std::invalid_argument(msg) {}
};

/// Explicit step larger than the monotone stability bound.
struct CflViolation : std::runtime_error {
  explicit CflViolation(const std::string& msg) : std::runtime_error(msg) {}
};

/// Non-finite value appeared in the evolving grid state.
struct NonFiniteState : std::runtime_error {
  explicit NonFiniteState(const std::string& msg) : std::runtime_error(msg) {}
};

/// Operands live on different grids.
struct GridMismatch : std::invalid_argument {
  explicit GridMismatch(const std::string& msg) : std::invalid_argument(msg) {}
};

/// Log-log fit attempted on degenerate (zero or non-finite) estimates.
struct DegenerateFit : std::runtime_error {
  explicit DegenerateFit(const std::string& msg) : std::runtime_error(msg) {}
};

/// Experiment configuration failed validation.
struct ConfigInvalid : std::runtime_error {
  explicit ConfigInvalid(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace roughflow
