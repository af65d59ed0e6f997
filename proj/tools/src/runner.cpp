#include "roughflow_cli/runner.hpp"

#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "roughflow/coupling.hpp"
#include "roughflow/ensemble.hpp"
#include "roughflow/errors.hpp"
#include "roughflow/evolve.hpp"
#include "roughflow/fpe.hpp"
#include "roughflow/fpe_diagnostics.hpp"
#include "roughflow/histogram.hpp"
#include "roughflow/krylov.hpp"
#include "roughflow/localized_norm.hpp"
#include "roughflow/lps.hpp"
#include "roughflow/split_experiment.hpp"
#include "roughflow/superposition.hpp"
#include "roughflow/version.hpp"

namespace roughflow::cli {

using nlohmann::json;

namespace {

namespace fs = std::filesystem;

std::array<double, 3> point_arg(const json& v, const char* what) {
  if (!v.is_array() || v.empty() || v.size() > 3) {
    throw ConfigInvalid(std::string(what) + " must be an array of 1..3 numbers");
  }
  std::array<double, 3> x{0.0, 0.0, 0.0};
  for (size_t k = 0; k < v.size(); ++k) x[k] = v[k].get<double>();
  return x;
}

std::vector<double> doubles_arg(const json& v, const char* what) {
  if (!v.is_array()) throw ConfigInvalid(std::string(what) + " must be an array of numbers");
  std::vector<double> out;
  out.reserve(v.size());
  for (const auto& e : v) out.push_back(e.get<double>());
  return out;
}

/// Collects outputs and their sidecars; the sidecar ties each data file to
/// the config hash so a directory of runs stays self-describing.
struct Emitter {
  fs::path dir;
  RunManifest* manifest;

  fs::path reserve(const std::string& name) const {
    manifest->outputs.push_back(name);
    return dir / name;
  }

  void seal(const std::string& name) const {
    const std::string meta = name + ".meta.json";
    json side;
    side["config_hash"] = manifest->config_hash;
    side["code_version"] = manifest->code_version;
    std::ofstream out(dir / meta);
    out << side.dump(2) << "\n";
    manifest->sidecars.push_back(meta);
  }

  void write_json(const std::string& name, const json& doc) const {
    std::ofstream out(reserve(name));
    out << doc.dump(2) << "\n";
    seal(name);
  }
};

void run_fpe_solve(const ExperimentConfig& config, const Emitter& emit) {
  const json& doc = config.doc;
  const auto field = field_from_config(doc["field"]);
  const auto grid = grid_from_config(doc["grid"]);
  const auto phi = initial_from_config(doc["initial"], grid);

  fpe::FpeOptions options;
  options.threads = config.threads;
  if (doc.value("form", std::string("conservative")) == "kolmogorov") {
    options.form = fpe::EquationForm::kolmogorov;
  }
  if (doc.contains("snapshot_times")) {
    options.snapshot_times = doubles_arg(doc["snapshot_times"], "snapshot_times");
  }
  const auto result = fpe::solve_fpe(field, phi, grid, options);

  json diag;
  diag["dt"] = result.dt;
  diag["steps"] = result.steps;
  diag["max_sup"] = result.max_sup;
  diag["suppressed_outflow"] = result.suppressed_outflow;
  diag["mass"] = result.mass;
  diag["boundary_layer_mass"] = result.boundary_layer_mass;
  std::vector<double> times;
  for (const auto& snap : result.snapshots) times.push_back(snap.time);
  diag["snapshot_times"] = times;
  emit.write_json("diagnostics.json", diag);

  for (size_t i = 0; i < result.snapshots.size(); ++i) {
    char name[32];
    std::snprintf(name, sizeof(name), "snapshot_%03zu.bin", i);
    fpe::write_binary(result.snapshots[i], emit.reserve(name).string());
    emit.seal(name);
  }
  fpe::write_csv(result.snapshots.back(), emit.reserve("final.csv").string());
  emit.seal("final.csv");
}

void run_mc(const ExperimentConfig& config, const Emitter& emit) {
  const json& doc = config.doc;
  const auto field = field_from_config(doc["field"]);
  const json& pblock = doc["particles"];
  const std::int64_t count = pblock["count"].get<std::int64_t>();

  particles::ParticleEnsemble start;
  if (pblock.contains("start")) {
    start = particles::delta_ensemble(point_arg(pblock["start"], "particles.start"), field.d,
                                      count, config.seed);
  } else {
    const json& dens = pblock["density"];
    if (!dens.is_object() || !dens.contains("grid") || !dens.contains("initial")) {
      throw ConfigInvalid("'particles.density' needs 'grid' and 'initial' blocks");
    }
    const auto grid = grid_from_config(dens["grid"]);
    const auto density = initial_from_config(dens["initial"], grid);
    start = particles::sample_from_density(density, count, config.seed);
  }

  particles::EvolveOptions options;
  options.dt = doc["dt"].get<double>();
  options.horizon = doc["horizon"].get<double>();
  options.threads = config.threads;
  options.record = doc.value("record", false);
  options.record_stride = doc.value("record_stride", 1);
  options.record_limit = doc.value("record_limit", std::int64_t{-1});
  const auto result = particles::evolve(start, field, options);

  particles::write_ensemble_csv(result.ensemble, emit.reserve("ensemble.csv").string());
  emit.seal("ensemble.csv");
  if (!result.records.empty()) {
    particles::write_paths_csv(result.records, emit.reserve("paths.csv").string());
    emit.seal("paths.csv");
  }

  json stats;
  stats["time"] = result.ensemble.time;
  stats["count"] = result.ensemble.count();
  stats["newly_frozen"] = result.newly_frozen;
  stats["substeps_total"] = result.substeps_total;
  if (doc.contains("histogram_grid")) {
    const auto hgrid = grid_from_config(doc["histogram_grid"]);
    const auto hist = particles::density_histogram(result.ensemble, hgrid);
    fpe::write_csv(hist.density, emit.reserve("histogram.csv").string());
    emit.seal("histogram.csv");
    stats["overflow_weight"] = hist.overflow_weight;
  }
  emit.write_json("run.json", stats);
}

void run_superposition(const ExperimentConfig& config, const Emitter& emit) {
  const json& doc = config.doc;
  const auto field = field_from_config(doc["field"]);
  const auto grid = grid_from_config(doc["grid"]);
  const auto phi = initial_from_config(doc["initial"], grid);
  const auto report = particles::superposition_check(
      field, phi, grid, doc["count"].get<std::int64_t>(), doc["dt"].get<double>(),
      doubles_arg(doc["check_times"], "check_times"), config.seed, config.threads);

  json out;
  out["times"] = report.times;
  out["l1_discrepancy"] = report.l1_discrepancy;
  out["overflow"] = report.overflow;
  out["fpe_dt"] = report.fpe_dt;
  out["mc_dt"] = report.mc_dt;
  emit.write_json("superposition.json", out);
}

void run_coupling(const ExperimentConfig& config, const Emitter& emit) {
  const json& doc = config.doc;
  const auto field_x = field_from_config(doc["field"]);
  const auto field_y =
      doc.contains("field_y") ? field_from_config(doc["field_y"]) : field_from_config(doc["field"]);
  const std::int64_t count = doc["count"].get<std::int64_t>();
  const auto start_x = point_arg(doc["start"], "start");
  const auto start_y = doc.contains("start_y") ? point_arg(doc["start_y"], "start_y") : start_x;

  // Shared seed and substreams: the two copies must consume identical draws.
  const auto ens_x = particles::delta_ensemble(start_x, field_x.d, count, config.seed);
  const auto ens_y = particles::delta_ensemble(start_y, field_y.d, count, config.seed);
  const auto report = particles::coupling_diagnostic(
      field_x, field_y, ens_x, ens_y, doc["epsilon"].get<double>(), doc["radius"].get<double>(),
      doc["dt"].get<double>(), doc["horizon"].get<double>(), config.threads);

  json out;
  out["epsilon"] = report.epsilon;
  out["radius"] = report.radius;
  out["times"] = report.times;
  out["phi_bar"] = report.phi_bar;
  out["exit_fraction"] = report.exit_fraction;
  out["max_abs_z"] = report.max_abs_z;
  emit.write_json("coupling.json", out);
}

void run_krylov(const ExperimentConfig& config, const Emitter& emit) {
  const json& doc = config.doc;
  const auto field = field_from_config(doc["field"]);
  const json& fblock = doc["observable"];
  const std::string kind = fblock.value("kind", std::string());

  std::function<double(double, const double*)> f;
  if (kind == "constant") {
    const double value = fblock.value("value", 1.0);
    f = [value](double, const double*) { return value; };
  } else {
    const double radius = fblock.value("radius", 1.0);
    std::array<double, 3> center{0.0, 0.0, 0.0};
    if (fblock.contains("center")) center = point_arg(fblock["center"], "observable.center");
    const int d = field.d;
    f = [radius, center, d](double, const double* x) {
      double r2 = 0.0;
      for (int k = 0; k < d; ++k) {
        const double z = x[k] - center[static_cast<size_t>(k)];
        r2 += z * z;
      }
      return r2 <= radius * radius ? 1.0 : 0.0;
    };
  }

  const auto report = particles::krylov_scaling(
      field, f, point_arg(doc["start"], "start"), doubles_arg(doc["windows"], "windows"),
      doc["count"].get<std::int64_t>(), doc["dt"].get<double>(), config.seed, config.threads);

  json out;
  out["windows"] = report.windows;
  out["estimates"] = report.estimates;
  out["theta_hat"] = report.theta_hat;
  emit.write_json("krylov.json", out);
}

void run_counterexample(const ExperimentConfig& config, const Emitter& emit,
                        RunManifest& manifest) {
  const json& doc = config.doc;
  const json& fb = doc["field"];
  if (fb.value("name", std::string()) != "counterexample") {
    throw ConfigInvalid("counterexample experiments need a field named 'counterexample'");
  }

  cex::SplitConfig split;
  split.params.d = fb.value("d", split.params.d);
  split.params.p = fb.value("p", split.params.p);
  split.params.alpha = fb.value("alpha", split.params.alpha);
  split.params.kappa = fb.value("kappa", split.params.kappa);
  split.params.strength = fb.value("strength", split.params.strength);
  if (doc.contains("start_heights")) {
    split.start_heights = doubles_arg(doc["start_heights"], "start_heights");
  }
  split.particles = doc.value("particles", split.particles);
  split.dt = doc.value("dt", split.dt);
  split.horizon = doc.value("horizon", split.horizon);
  split.seed = config.seed;
  split.threads = config.threads;
  split.calibrate = doc.value("calibrate", split.calibrate);
  split.modulus_floor = doc.value("modulus_floor", split.modulus_floor);
  split.event_floor = doc.value("event_floor", split.event_floor);
  split.pilot_particles = doc.value("pilot_particles", split.pilot_particles);
  split.pilot_height = doc.value("pilot_height", split.pilot_height);
  split.strength_exponent_max = doc.value("strength_exponent_max", split.strength_exponent_max);
  split.modulus_paths = doc.value("modulus_paths", split.modulus_paths);
  split.modulus_records = doc.value("modulus_records", split.modulus_records);

  const auto stats = cex::run_split_experiment(split);
  manifest.calibration["strength"] = stats.strength;

  json out;
  out["strength"] = stats.strength;
  out["calibrated"] = stats.calibrated;
  out["pilot_event_rate"] = stats.pilot_event_rate;
  out["pilot_modulus_rate"] = stats.pilot_modulus_rate;
  out["slope"] = stats.slope;
  out["slope_se"] = stats.slope_se;
  json starts = json::array();
  for (const auto& s : stats.starts) {
    json row;
    row["height"] = s.height;
    row["functional_mean"] = s.functional_mean;
    row["functional_se"] = s.functional_se;
    row["mirrored_mean"] = s.mirrored_mean;
    row["antithetic_sum"] = s.antithetic_sum;
    row["event_rate"] = s.event_rate;
    row["conditional_stay"] = s.conditional_stay;
    row["modulus_rate"] = s.modulus_rate;
    row["frozen_fraction"] = s.frozen_fraction;
    row["mirrored_frozen_fraction"] = s.mirrored_frozen_fraction;
    row["tail_bound"] = s.tail_bound;
    starts.push_back(row);
  }
  out["starts"] = starts;
  emit.write_json("split_stats.json", out);

  std::ofstream csv(emit.reserve("starts.csv"));
  csv << "height,functional_mean,functional_se,mirrored_mean,antithetic_sum,event_rate,"
         "conditional_stay,modulus_rate,frozen_fraction\n";
  char line[512];
  for (const auto& s : stats.starts) {
    std::snprintf(line, sizeof(line),
                  "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n", s.height,
                  s.functional_mean, s.functional_se, s.mirrored_mean, s.antithetic_sum,
                  s.event_rate, s.conditional_stay, s.modulus_rate, s.frozen_fraction);
    csv << line;
  }
  csv.close();
  emit.seal("starts.csv");
}

void run_norms(const ExperimentConfig& config, const Emitter& emit) {
  const json& doc = config.doc;
  const auto field = field_from_config(doc["field"]);
  const auto grid = grid_from_config(doc["grid"]);
  const double radius = doc["radius"].get<double>();
  const int time_samples = doc.value("time_samples", 8);

  std::vector<double> ps;
  if (doc.contains("p_values")) {
    ps = doubles_arg(doc["p_values"], "p_values");
  } else {
    ps.push_back(doc["p"].get<double>());
  }
  std::vector<double> qs;
  if (doc.contains("q_values")) {
    qs = doubles_arg(doc["q_values"], "q_values");
    if (qs.size() != ps.size()) throw ConfigInvalid("'q_values' must match 'p_values' in length");
  } else {
    const double q = doc.value("q", 0.0);
    qs.assign(ps.size(), q);  // q <= 0 means q = p below
  }

  const int d = field.d;
  const auto speed = [&field, d](double t, const double* x) {
    double b[3] = {0.0, 0.0, 0.0};
    field.drift(t, x, b);
    double n2 = 0.0;
    for (int k = 0; k < d; ++k) n2 += b[k] * b[k];
    return std::sqrt(n2);
  };

  json rows = json::array();
  std::ofstream csv(emit.reserve("norms.csv"));
  csv << "p,q,value,subcritical_margin\n";
  char line[256];
  for (size_t i = 0; i < ps.size(); ++i) {
    const double p = ps[i];
    const double q = qs[i] > 0.0 ? qs[i] : p;
    const double value =
        fields::localized_norm(speed, p, q, radius, grid.horizon, grid, time_samples);
    double margin = 0.0;
    bool subcritical = true;
    try {
      margin = fields::make_lps(d, p, q).e;
    } catch (const SubcriticalityViolation&) {
      subcritical = false;
    }
    json row;
    row["p"] = p;
    row["q"] = q;
    row["value"] = value;
    if (subcritical) row["subcritical_margin"] = margin;
    rows.push_back(row);
    std::snprintf(line, sizeof(line), "%.17g,%.17g,%.17g,", p, q, value);
    csv << line;
    if (subcritical) {
      std::snprintf(line, sizeof(line), "%.17g\n", margin);
      csv << line;
    } else {
      csv << "\n";
    }
  }
  csv.close();
  emit.seal("norms.csv");

  json out;
  out["radius"] = radius;
  out["horizon"] = grid.horizon;
  out["time_samples"] = time_samples;
  out["rows"] = rows;
  emit.write_json("norms.json", out);
}

void run_degiorgi(const ExperimentConfig& config, const Emitter& emit) {
  const json& doc = config.doc;
  const auto field = field_from_config(doc["field"]);
  const auto grid = grid_from_config(doc["grid"]);
  const auto phi = initial_from_config(doc["initial"], grid);

  fpe::FpeOptions options;
  options.threads = config.threads;
  if (doc.contains("snapshot_times")) {
    options.snapshot_times = doubles_arg(doc["snapshot_times"], "snapshot_times");
  } else {
    const int n = 16;
    for (int i = 1; i < n; ++i) options.snapshot_times.push_back(grid.horizon * i / n);
  }
  const auto result = fpe::solve_fpe(field, phi, grid, options);

  double base_level = 0.0;
  if (doc.contains("base_level") && doc["base_level"].is_number()) {
    base_level = doc["base_level"].get<double>();
  } else {
    base_level = phi.max_value();  // "auto": the sup of the initial data
  }
  const double multiplier = doc.value("multiplier", 1.0);
  const int level_count = doc.value("level_count", 8);
  const double ball_radius = doc.value("ball_radius", 0.0);
  const double t_lo = doc.value("t_lo", 0.0);
  const double t_hi = doc.value("t_hi", grid.horizon);

  const auto cascade = fpe::degiorgi_sequence(result.snapshots, base_level, multiplier,
                                              level_count);
  const auto energy =
      fpe::energy_report(result.snapshots, multiplier * base_level, ball_radius, t_lo, t_hi);

  json out;
  out["base_level"] = cascade.base_level;
  out["multiplier"] = cascade.multiplier;
  out["levels"] = cascade.levels;
  out["decay"] = cascade.decay;
  out["vanished"] = cascade.vanished;
  json en;
  en["level"] = energy.level;
  en["truncation_sup"] = energy.truncation_sup;
  en["truncation_l2"] = energy.truncation_l2;
  en["levelset_measure"] = energy.levelset_measure;
  out["energy"] = en;
  out["solver_dt"] = result.dt;
  out["solver_steps"] = result.steps;
  emit.write_json("degiorgi.json", out);

  std::ofstream csv(emit.reserve("decay.csv"));
  csv << "j,level,measure\n";
  char line[128];
  for (size_t j = 0; j < cascade.levels.size(); ++j) {
    std::snprintf(line, sizeof(line), "%zu,%.17g,%.17g\n", j, cascade.levels[j],
                  cascade.decay[j]);
    csv << line;
  }
  csv.close();
  emit.seal("decay.csv");
}

}  // namespace

RunManifest run_experiment(const ExperimentConfig& config) {
  const auto problems = validate_config(config);
  if (!problems.empty()) {
    std::string msg = "invalid config";
    for (const auto& p : problems) msg += "\n  - " + p;
    throw ConfigInvalid(msg);
  }

  RunManifest manifest;
  manifest.config_hash = config_hash(config);
  manifest.code_version = version_string;

  fs::create_directories(config.out_dir);
  Emitter emit{fs::path(config.out_dir), &manifest};

  const auto t0 = std::chrono::steady_clock::now();
  switch (config.kind) {
    case ExperimentKind::fpe_solve:
      run_fpe_solve(config, emit);
      break;
    case ExperimentKind::mc_run:
      run_mc(config, emit);
      break;
    case ExperimentKind::superposition:
      run_superposition(config, emit);
      break;
    case ExperimentKind::coupling:
      run_coupling(config, emit);
      break;
    case ExperimentKind::krylov:
      run_krylov(config, emit);
      break;
    case ExperimentKind::counterexample:
      run_counterexample(config, emit, manifest);
      break;
    case ExperimentKind::norms:
      run_norms(config, emit);
      break;
    case ExperimentKind::degiorgi:
      run_degiorgi(config, emit);
      break;
    case ExperimentKind::unknown:
      throw ConfigInvalid("unknown experiment kind");
  }
  const auto t1 = std::chrono::steady_clock::now();
  manifest.wall_time_seconds = std::chrono::duration<double>(t1 - t0).count();

  json m;
  m["config_hash"] = manifest.config_hash;
  m["code_version"] = manifest.code_version;
  m["kind"] = kind_name(config.kind);
  m["wall_time_seconds"] = manifest.wall_time_seconds;
  m["outputs"] = manifest.outputs;
  m["sidecars"] = manifest.sidecars;
  m["calibration"] = manifest.calibration;
  std::ofstream out(fs::path(config.out_dir) / "manifest.json");
  out << m.dump(2) << "\n";

  return manifest;
}

}  // namespace roughflow::cli
