#include <cstdio>
#include <exception>
#include <string>

#include <CLI11.hpp>

#include "roughflow/errors.hpp"
#include "roughflow/version.hpp"
#include "roughflow_cli/config.hpp"
#include "roughflow_cli/runner.hpp"

namespace {

constexpr int exit_ok = 0;
constexpr int exit_config = 2;
constexpr int exit_engine = 3;

struct CommonArgs {
  std::string config_path;
  std::string out_dir;
  std::uint64_t seed = 0;
  int threads = 0;
  bool seed_given = false;
  bool out_given = false;
  bool threads_given = false;
};

/// Applies command-line overrides into the document so they are part of the
/// recorded config (and, for the seed, of the config hash).
roughflow::cli::ExperimentConfig load_with_overrides(const CommonArgs& args) {
  auto config = roughflow::cli::load_config(args.config_path);
  if (args.seed_given) config.doc["seed"] = args.seed;
  if (args.out_given) config.doc["out"] = args.out_dir;
  if (args.threads_given) config.doc["threads"] = args.threads;
  return roughflow::cli::parse_config(config.doc);
}

void print_kinds() {
  std::printf("experiments:\n");
  std::printf("  fpe-solve       grid march of the forward/backward equation\n");
  std::printf("  mc-run          particle ensemble under a coefficient field\n");
  std::printf("  superposition   grid density vs particle histogram, L1 gap\n");
  std::printf("  coupling        two copies under one noise, smoothed separation\n");
  std::printf("  krylov          occupation-integral scaling over window lengths\n");
  std::printf("  counterexample  splitting experiment at the singular point\n");
  std::printf("  norms           localized space-time norms of the drift\n");
  std::printf("  degiorgi        level-set decay cascade of a grid solution\n");
}

void print_fields() {
  std::printf("fields:\n");
  std::printf("  constant        d, b (vector), a0; fixed drift, isotropic diffusion\n");
  std::printf("  rotation        d, a0; divergence-free rigid rotation in the x-y plane\n");
  std::printf("  ou-linear       d, gamma, a0; linear pull toward the origin\n");
  std::printf("  counterexample  d, p, alpha, kappa, strength; singular repelling drift\n");
  std::printf("any field accepts mollify_level to smooth the coefficients\n");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"roughflow: rough-coefficient flow experiments"};
  app.set_version_flag("--version", roughflow::version_string);
  app.require_subcommand(1);

  CommonArgs args;

  auto add_common = [&args](CLI::App* cmd) {
    cmd->add_option("--config", args.config_path, "JSON experiment config")
        ->required()
        ->check(CLI::ExistingFile);
    cmd->add_option("--out", args.out_dir, "output directory (overrides config)")
        ->each([&args](const std::string&) { args.out_given = true; });
    cmd->add_option("--seed", args.seed, "noise seed (overrides config, recorded)")
        ->each([&args](const std::string&) { args.seed_given = true; });
    cmd->add_option("--threads", args.threads, "worker threads; never changes results")
        ->each([&args](const std::string&) { args.threads_given = true; });
  };

  auto* cmd_run = app.add_subcommand("run", "execute an experiment and write its outputs");
  add_common(cmd_run);
  auto* cmd_validate =
      app.add_subcommand("validate", "check a config and print every problem found");
  add_common(cmd_validate);
  auto* cmd_fields = app.add_subcommand("list-fields", "describe the built-in fields");
  auto* cmd_kinds = app.add_subcommand("list-experiments", "describe the experiment kinds");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return exit_config;
  }

  if (cmd_fields->parsed()) {
    print_fields();
    return exit_ok;
  }
  if (cmd_kinds->parsed()) {
    print_kinds();
    return exit_ok;
  }

  try {
    const auto config = load_with_overrides(args);
    if (cmd_validate->parsed()) {
      const auto problems = roughflow::cli::validate_config(config);
      if (problems.empty()) {
        std::printf("ok: %s\n", roughflow::cli::config_hash(config).c_str());
        return exit_ok;
      }
      for (const auto& p : problems) std::printf("problem: %s\n", p.c_str());
      return exit_config;
    }
    const auto manifest = roughflow::cli::run_experiment(config);
    std::printf("wrote %zu outputs to %s (hash %s, %.2fs)\n", manifest.outputs.size(),
                config.out_dir.c_str(), manifest.config_hash.c_str(),
                manifest.wall_time_seconds);
    return exit_ok;
  } catch (const roughflow::ConfigInvalid& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return exit_config;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "engine error: %s\n", e.what());
    return exit_engine;
  }
}
