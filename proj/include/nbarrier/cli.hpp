#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "nbarrier/hypotheses.hpp"
#include "nbarrier/model.hpp"
#include "nbarrier/verify.hpp"

namespace nbarrier::cli {

/// Parsed and validated experiment configuration. The JSON schema is strict:
/// unknown keys anywhere are ConfigError.
struct ExperimentConfig {
  ReactionSystem system;

  // problem
  Point e_minus;
  Point e_plus;
  std::optional<double> theta;  // empty = free speed
  double half_length = 30.0;
  int grid_points = 600;
  double phase_anchor = 0.5;

  // geometry
  Vec bounding_box;  // empty = auto (2x largest axis root)
  int resolution = 0;
  double band_tol = 1e-10;
  double margin = 0.0;

  // sweep
  std::vector<std::vector<double>> sweep_levels;  // per-species level lists

  // tolerances
  double tol_verify = 1e-3;
  double newton_tol = 1e-10;
  double equilibrium_tol = 1e-9;

  // output
  Vec export_weights;  // p,q columns of wave.csv; default all ones
};

/// Loads a config file and applies dot-path overrides ("problem.theta=free",
/// "system.d.1=2") before validation. Throws Error(ConfigError).
ExperimentConfig load_config(const std::filesystem::path& path,
                             const std::vector<std::string>& overrides = {});

// Subcommand drivers; each writes its artifacts into out_dir and returns the
// process exit code (0 pass, 1 domain failure, 2 config/usage error).
int run_check(const ExperimentConfig& config,
              const std::filesystem::path& out_dir);
int run_bounds(const ExperimentConfig& config,
               const std::filesystem::path& out_dir);
int run_solve(const ExperimentConfig& config,
              const std::filesystem::path& out_dir);
int run_verify(const ExperimentConfig& config,
               const std::filesystem::path& out_dir);

/// Full argv entry point used by the binary.
int run_main(int argc, char** argv);

}  // namespace nbarrier::cli
