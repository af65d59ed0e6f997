#include "roughflow_cli/config.hpp"

#include <array>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>

#include "roughflow/errors.hpp"
#include "roughflow/mollify.hpp"
#include "roughflow/singular_drift.hpp"

namespace roughflow::cli {

using nlohmann::json;

namespace {

struct KindEntry {
  ExperimentKind kind;
  const char* name;
  bool stochastic;
};

constexpr std::array<KindEntry, 8> kind_table{{
    {ExperimentKind::fpe_solve, "fpe-solve", false},
    {ExperimentKind::mc_run, "mc-run", true},
    {ExperimentKind::superposition, "superposition", true},
    {ExperimentKind::coupling, "coupling", true},
    {ExperimentKind::krylov, "krylov", true},
    {ExperimentKind::counterexample, "counterexample", true},
    {ExperimentKind::norms, "norms", false},
    {ExperimentKind::degiorgi, "degiorgi", false},
}};

std::array<double, 3> point_from(const json& v, const char* what) {
  if (!v.is_array() || v.empty() || v.size() > 3) {
    throw ConfigInvalid(std::string(what) + " must be an array of 1..3 numbers");
  }
  std::array<double, 3> x{0.0, 0.0, 0.0};
  for (size_t k = 0; k < v.size(); ++k) x[k] = v[k].get<double>();
  return x;
}

}  // namespace

const char* kind_name(ExperimentKind kind) {
  for (const auto& e : kind_table) {
    if (e.kind == kind) return e.name;
  }
  return "unknown";
}

ExperimentKind kind_from_name(const std::string& name) {
  for (const auto& e : kind_table) {
    if (name == e.name) return e.kind;
  }
  return ExperimentKind::unknown;
}

bool kind_is_stochastic(ExperimentKind kind) {
  for (const auto& e : kind_table) {
    if (e.kind == kind) return e.stochastic;
  }
  return false;
}

ExperimentConfig parse_config(const json& doc) {
  ExperimentConfig config;
  config.doc = doc;
  if (doc.is_object()) {
    if (doc.contains("kind") && doc["kind"].is_string()) {
      config.kind = kind_from_name(doc["kind"].get<std::string>());
    }
    config.out_dir = doc.value("out", std::string("runs/") + kind_name(config.kind));
    if (doc.contains("seed")) {
      // Accepts both parser-unsigned and programmatic signed storage.
      const json& seed = doc["seed"];
      if (seed.is_number_unsigned()) {
        config.seed = seed.get<std::uint64_t>();
      } else if (seed.is_number_integer() && seed.get<std::int64_t>() >= 0) {
        config.seed = static_cast<std::uint64_t>(seed.get<std::int64_t>());
      }
    }
    config.threads = doc.value("threads", 1);
  }
  return config;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigInvalid("cannot open config file: " + path);
  json doc;
  try {
    in >> doc;
  } catch (const json::exception& e) {
    throw ConfigInvalid(std::string("config is not valid JSON: ") + e.what());
  }
  return parse_config(doc);
}

std::string config_hash(const ExperimentConfig& config) {
  json canonical = config.doc;
  if (canonical.is_object()) {
    canonical.erase("out");
    canonical.erase("threads");
  }
  const std::string dump = canonical.dump();
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : dump) {
    h ^= c;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return std::string(buf);
}

fields::CoefficientField field_from_config(const json& block) {
  if (!block.is_object() || !block.contains("name") || !block["name"].is_string()) {
    throw ConfigInvalid("field block needs a 'name' string");
  }
  const std::string name = block["name"].get<std::string>();
  const double a0 = block.value("a0", 1.0);
  fields::CoefficientField field;
  if (name == "constant") {
    const int d = block.value("d", 2);
    std::array<double, 3> b{0.0, 0.0, 0.0};
    if (block.contains("b")) b = point_from(block["b"], "field.b");
    field = fields::constant_field(d, b, a0);
  } else if (name == "rotation") {
    field = fields::rotation_field(block.value("d", 2), a0);
  } else if (name == "ou-linear") {
    if (!block.contains("gamma")) throw ConfigInvalid("ou-linear field needs 'gamma'");
    field = fields::ou_linear_field(block.value("d", 2), block["gamma"].get<double>(), a0);
  } else if (name == "counterexample") {
    fields::CounterexampleParams params;
    params.d = block.value("d", 3);
    params.p = block.value("p", 2.0);
    params.alpha = block.value("alpha", 1.2);
    params.kappa = block.value("kappa", 1.3);
    params.strength = block.value("strength", 256.0);
    params.validate();
    field = block.value("noiseless", false) ? fields::counterexample_field_noiseless(params)
                                            : fields::counterexample_field(params);
  } else {
    throw ConfigInvalid("unknown field name '" + name +
                        "'; expected constant, rotation, ou-linear, or counterexample");
  }
  if (block.contains("mollify_level")) {
    fields::MollifierSpec spec;
    spec.level = block["mollify_level"].get<int>();
    spec.points_per_radius = block.value("mollify_points_per_radius", 8);
    field = fields::mollify(field, spec);
  }
  return field;
}

fpe::GridSpec grid_from_config(const json& block) {
  if (!block.is_object()) throw ConfigInvalid("grid block must be an object");
  fpe::GridSpec grid;
  grid.d = block.value("d", 2);
  grid.half_width = block.value("half_width", 1.0);
  grid.spacing = block.value("spacing", 0.1);
  grid.dt = block.value("dt", 0.0);
  grid.horizon = block.value("horizon", 1.0);
  if (block.contains("center")) grid.center = point_from(block["center"], "grid.center");
  if (grid.d < 1 || grid.d > 3) throw ConfigInvalid("grid.d must be 1, 2, or 3");
  if (!(grid.spacing > 0.0) || !(grid.half_width > 0.0)) {
    throw ConfigInvalid("grid spacing and half_width must be positive");
  }
  if (grid.cells_per_dim() < 2) throw ConfigInvalid("grid needs at least two cells per axis");
  if (!(grid.horizon > 0.0)) throw ConfigInvalid("grid.horizon must be positive");
  return grid;
}

fpe::GridFunction initial_from_config(const json& block, const fpe::GridSpec& grid) {
  if (!block.is_object() || !block.contains("kind") || !block["kind"].is_string()) {
    throw ConfigInvalid("initial block needs a 'kind' string");
  }
  const std::string kind = block["kind"].get<std::string>();
  fpe::GridFunction phi;
  if (kind == "gaussian") {
    const double variance = block.value("variance", 0.5);
    std::array<double, 3> mean{0.0, 0.0, 0.0};
    if (block.contains("mean")) mean = point_from(block["mean"], "initial.mean");
    if (!(variance > 0.0)) throw ConfigInvalid("initial.variance must be positive");
    phi = fpe::gaussian_density(grid, variance, mean);
  } else if (kind == "ball") {
    const double radius = block.value("radius", 0.5);
    const double value = block.value("value", 1.0);
    std::array<double, 3> center{0.0, 0.0, 0.0};
    if (block.contains("center")) center = point_from(block["center"], "initial.center");
    if (!(radius > 0.0)) throw ConfigInvalid("initial.radius must be positive");
    phi = fpe::sample_on_grid(grid, [&](const double* x) {
      double r2 = 0.0;
      for (int k = 0; k < grid.d; ++k) {
        double z = x[k] - center[static_cast<size_t>(k)];
        r2 += z * z;
      }
      return r2 <= radius * radius ? value : 0.0;
    });
  } else if (kind == "constant") {
    phi = fpe::sample_on_grid(grid, [&](const double*) { return block.value("value", 1.0); });
  } else {
    throw ConfigInvalid("unknown initial kind '" + kind +
                        "'; expected gaussian, ball, or constant");
  }
  if (block.value("normalize", false)) phi.normalize_mass();
  return phi;
}

namespace {

void check_positive(const json& doc, const char* key, std::vector<std::string>& out) {
  if (doc.contains(key) && doc[key].is_number() && !(doc[key].get<double>() > 0.0)) {
    out.push_back(std::string("'") + key + "' must be positive");
  }
}

void need(const json& doc, const char* key, std::vector<std::string>& out) {
  if (!doc.contains(key)) out.push_back(std::string("missing required key '") + key + "'");
}

void try_block(const char* label, std::vector<std::string>& out,
               const std::function<void()>& body) {
  try {
    body();
  } catch (const std::exception& e) {
    out.push_back(std::string(label) + ": " + e.what());
  }
}

}  // namespace

std::vector<std::string> validate_config(const ExperimentConfig& config) {
  std::vector<std::string> out;
  const json& doc = config.doc;
  if (!doc.is_object()) {
    out.push_back("config must be a JSON object");
    return out;
  }
  if (config.kind == ExperimentKind::unknown) {
    std::string names;
    for (const auto& e : kind_table) {
      if (!names.empty()) names += ", ";
      names += e.name;
    }
    out.push_back("missing or unknown 'kind'; expected one of: " + names);
    return out;
  }
  if (kind_is_stochastic(config.kind) && !doc.contains("seed")) {
    out.push_back("missing 'seed': stochastic experiments must pin the noise stream");
  }
  if (doc.contains("threads") && doc["threads"].is_number_integer() &&
      doc["threads"].get<int>() < 0) {
    out.push_back("'threads' must be >= 0");
  }

  const bool wants_field = config.kind != ExperimentKind::unknown;
  if (wants_field) {
    if (!doc.contains("field")) {
      out.push_back("missing required key 'field'");
    } else {
      try_block("field", out, [&] { (void)field_from_config(doc["field"]); });
    }
  }

  auto check_grid_initial = [&] {
    need(doc, "grid", out);
    need(doc, "initial", out);
    if (doc.contains("grid")) {
      try_block("grid", out, [&] {
        auto grid = grid_from_config(doc["grid"]);
        if (doc.contains("initial")) {
          try_block("initial", out, [&] { (void)initial_from_config(doc["initial"], grid); });
        }
      });
    }
  };

  switch (config.kind) {
    case ExperimentKind::fpe_solve: {
      check_grid_initial();
      if (doc.contains("form")) {
        const std::string form = doc["form"].get<std::string>();
        if (form != "conservative" && form != "kolmogorov") {
          out.push_back("'form' must be conservative or kolmogorov");
        }
      }
      break;
    }
    case ExperimentKind::mc_run: {
      need(doc, "particles", out);
      need(doc, "dt", out);
      need(doc, "horizon", out);
      check_positive(doc, "dt", out);
      check_positive(doc, "horizon", out);
      if (doc.contains("particles")) {
        const json& p = doc["particles"];
        if (!p.is_object() || !p.contains("count")) {
          out.push_back("'particles' must be an object with 'count'");
        } else if (p["count"].get<std::int64_t>() < 1) {
          out.push_back("'particles.count' must be at least 1");
        }
        if (p.is_object() && !p.contains("start") && !p.contains("density")) {
          out.push_back("'particles' needs 'start' (a point) or 'density' (gaussian on a grid)");
        }
      }
      break;
    }
    case ExperimentKind::superposition: {
      check_grid_initial();
      need(doc, "count", out);
      need(doc, "dt", out);
      need(doc, "check_times", out);
      check_positive(doc, "dt", out);
      if (doc.contains("check_times") &&
          (!doc["check_times"].is_array() || doc["check_times"].empty())) {
        out.push_back("'check_times' must be a non-empty array");
      }
      break;
    }
    case ExperimentKind::coupling: {
      need(doc, "start", out);
      need(doc, "count", out);
      need(doc, "epsilon", out);
      need(doc, "radius", out);
      need(doc, "dt", out);
      need(doc, "horizon", out);
      check_positive(doc, "epsilon", out);
      check_positive(doc, "radius", out);
      check_positive(doc, "dt", out);
      check_positive(doc, "horizon", out);
      break;
    }
    case ExperimentKind::krylov: {
      need(doc, "observable", out);
      need(doc, "start", out);
      need(doc, "windows", out);
      need(doc, "count", out);
      need(doc, "dt", out);
      check_positive(doc, "dt", out);
      if (doc.contains("windows") && (!doc["windows"].is_array() || doc["windows"].size() < 2)) {
        out.push_back("'windows' must list at least two window lengths");
      }
      if (doc.contains("observable")) {
        const json& f = doc["observable"];
        const std::string k = f.is_object() ? f.value("kind", std::string()) : std::string();
        if (k != "constant" && k != "ball") {
          out.push_back("'observable.kind' must be constant or ball");
        }
      }
      break;
    }
    case ExperimentKind::counterexample: {
      check_positive(doc, "dt", out);
      check_positive(doc, "horizon", out);
      if (doc.contains("particles") && doc["particles"].is_number_integer() &&
          doc["particles"].get<std::int64_t>() < 1) {
        out.push_back("'particles' must be at least 1");
      }
      break;
    }
    case ExperimentKind::norms: {
      need(doc, "grid", out);
      need(doc, "radius", out);
      check_positive(doc, "radius", out);
      if (doc.contains("grid")) {
        try_block("grid", out, [&] { (void)grid_from_config(doc["grid"]); });
      }
      if (!doc.contains("p") && !doc.contains("p_values")) {
        out.push_back("norms needs 'p' or 'p_values'");
      }
      break;
    }
    case ExperimentKind::degiorgi: {
      check_grid_initial();
      check_positive(doc, "base_level", out);
      check_positive(doc, "multiplier", out);
      break;
    }
    case ExperimentKind::unknown:
      break;
  }
  return out;
}

}  // namespace roughflow::cli
