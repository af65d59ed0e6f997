#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"
#include "roughflow/field.hpp"
#include "roughflow/grid.hpp"

namespace roughflow::cli {

enum class ExperimentKind {
  unknown,
  fpe_solve,
  mc_run,
  superposition,
  coupling,
  krylov,
  counterexample,
  norms,
  degiorgi,
};

const char* kind_name(ExperimentKind kind);
ExperimentKind kind_from_name(const std::string& name);
bool kind_is_stochastic(ExperimentKind kind);

/// One experiment description: the parsed document plus the resolved
/// execution parameters. `doc` keeps every experiment-defining key; `out`
/// and `threads` ride along but stay outside the content hash.
struct ExperimentConfig {
  ExperimentKind kind = ExperimentKind::unknown;
  nlohmann::json doc;
  std::string out_dir;
  std::uint64_t seed = 0;
  int threads = 1;
};

/// Parses a JSON document into a config. Structural problems (not an
/// object, missing kind) are deferred to validate_config; only malformed
/// JSON in load_config throws ConfigInvalid.
ExperimentConfig parse_config(const nlohmann::json& doc);
ExperimentConfig load_config(const std::string& path);

/// Every schema and parameter-gate violation, without running anything.
std::vector<std::string> validate_config(const ExperimentConfig& config);

/// FNV-1a hash of the canonical dump (sorted keys, execution-only keys
/// `out` and `threads` removed), as 16 hex digits. Reruns of one experiment
/// agree on it regardless of thread count or output directory.
std::string config_hash(const ExperimentConfig& config);

/// Block builders shared by validation and the runner. All throw on bad
/// blocks: ConfigInvalid for schema problems, the engine gate exceptions
/// for parameter violations.
fields::CoefficientField field_from_config(const nlohmann::json& block);
fpe::GridSpec grid_from_config(const nlohmann::json& block);
fpe::GridFunction initial_from_config(const nlohmann::json& block, const fpe::GridSpec& grid);

}  // namespace roughflow::cli
