#pragma once

#include <map>
#include <string>
#include <vector>

#include "roughflow_cli/config.hpp"

namespace roughflow::cli {

/// Record of one completed run: what was written and how it was produced.
/// Serialized as manifest.json next to the outputs.
struct RunManifest {
  std::string config_hash;
  std::string code_version;
  double wall_time_seconds = 0.0;
  std::vector<std::string> outputs;           // data files, relative to out_dir
  std::vector<std::string> sidecars;          // one .meta.json per output
  std::map<std::string, double> calibration;  // values chosen at run time
};

/// Validates the config, executes the experiment, and writes every output
/// plus manifest.json under config.out_dir. Data files and sidecars depend
/// only on the config hash inputs, so reruns (at any thread count) reproduce
/// them byte for byte; only the manifest's wall time differs.
RunManifest run_experiment(const ExperimentConfig& config);

}  // namespace roughflow::cli
