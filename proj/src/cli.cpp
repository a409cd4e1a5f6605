#include "nbarrier/cli.hpp"

#include <chrono>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "format_util.hpp"
#include "nbarrier/nbmp.hpp"
#include "nbarrier/solver.hpp"

namespace nbarrier::cli {

namespace {

using nlohmann::json;

void check_keys(const json& obj, std::initializer_list<const char*> allowed,
                const std::string& context) {
  if (!obj.is_object())
    throw Error(Errc::ConfigError, context + " must be a JSON object");
  for (const auto& [key, _] : obj.items()) {
    bool known = false;
    for (const char* candidate : allowed) known = known || key == candidate;
    if (!known)
      throw Error(Errc::ConfigError,
                  "unknown key '" + key + "' in " + context);
  }
}

double get_number(const json& obj, const char* key, double fallback) {
  if (!obj.contains(key)) return fallback;
  if (!obj.at(key).is_number())
    throw Error(Errc::ConfigError, std::string(key) + " must be a number");
  return obj.at(key).get<double>();
}

Vec get_point(const json& obj, const char* key, int n) {
  const auto values = obj.at(key).get<std::vector<double>>();
  if (static_cast<int>(values.size()) != n)
    throw Error(Errc::ConfigError,
                std::string(key) + " must have one entry per species");
  return Eigen::Map<const Vec>(values.data(), n);
}

void apply_override(json& doc, const std::string& spec) {
  const auto eq = spec.find('=');
  if (eq == std::string::npos || eq == 0)
    throw Error(Errc::ConfigError, "override must look like KEY=VALUE");
  const std::string path = spec.substr(0, eq);
  const std::string raw = spec.substr(eq + 1);

  json value;
  try {
    value = json::parse(raw);
  } catch (const json::parse_error&) {
    value = raw;  // bare strings like `free` need no quotes
  }

  json* node = &doc;
  std::istringstream segments(path);
  std::string segment;
  std::vector<std::string> parts;
  while (std::getline(segments, segment, '.')) parts.push_back(segment);
  if (parts.empty())
    throw Error(Errc::ConfigError, "empty override path");
  for (size_t i = 0; i + 1 < parts.size(); ++i) {
    const std::string& p = parts[i];
    if (node->is_array()) {
      size_t index = 0;
      try {
        index = std::stoul(p);
      } catch (...) {
        throw Error(Errc::ConfigError, "array index expected in '" + path + "'");
      }
      if (index >= node->size())
        throw Error(Errc::ConfigError, "override index out of range: " + path);
      node = &(*node)[index];
    } else {
      node = &(*node)[p];
    }
  }
  const std::string& leaf = parts.back();
  if (node->is_array()) {
    size_t index = 0;
    try {
      index = std::stoul(leaf);
    } catch (...) {
      throw Error(Errc::ConfigError, "array index expected in '" + path + "'");
    }
    if (index >= node->size())
      throw Error(Errc::ConfigError, "override index out of range: " + path);
    (*node)[index] = value;
  } else {
    (*node)[leaf] = value;
  }
}

std::vector<double> sweep_axis(const json& sweep, const char* key) {
  const auto levels = sweep.at(key).get<std::vector<double>>();
  if (levels.empty())
    throw Error(Errc::ConfigError,
                std::string("sweep.") + key + " must be nonempty");
  for (double level : levels)
    if (!(level > 0.0))
      throw Error(Errc::ConfigError,
                  std::string("sweep.") + key + " entries must be positive");
  return levels;
}

}  // namespace

ExperimentConfig load_config(const std::filesystem::path& path,
                             const std::vector<std::string>& overrides) {
  std::ifstream is(path);
  if (!is)
    throw Error(Errc::ConfigError, "cannot open config " + path.string());
  json doc;
  try {
    doc = json::parse(is);
  } catch (const json::parse_error& e) {
    throw Error(Errc::ConfigError,
                "config " + path.string() + " is not valid JSON: " + e.what());
  }
  for (const auto& spec : overrides) apply_override(doc, spec);

  check_keys(doc, {"system", "problem", "geometry", "sweep", "tolerances",
                   "output"},
             "config");
  if (!doc.contains("system") || !doc.contains("problem"))
    throw Error(Errc::ConfigError, "config needs 'system' and 'problem'");

  ExperimentConfig config;
  config.system = system_from_json(doc.at("system"));
  const int n = config.system.n_species;

  const json& problem = doc.at("problem");
  check_keys(problem, {"e_minus", "e_plus", "theta", "L", "N", "phase_anchor"},
             "problem");
  for (const char* key : {"e_minus", "e_plus"})
    if (!problem.contains(key))
      throw Error(Errc::ConfigError,
                  std::string("problem missing '") + key + "'");
  config.e_minus = get_point(problem, "e_minus", n);
  config.e_plus = get_point(problem, "e_plus", n);
  if (problem.contains("theta")) {
    const json& theta = problem.at("theta");
    if (theta.is_string()) {
      if (theta.get<std::string>() != "free")
        throw Error(Errc::ConfigError, "theta must be a number or \"free\"");
      config.theta.reset();
    } else if (theta.is_number()) {
      config.theta = theta.get<double>();
    } else {
      throw Error(Errc::ConfigError, "theta must be a number or \"free\"");
    }
  }
  config.half_length = get_number(problem, "L", config.half_length);
  if (!(config.half_length > 0.0))
    throw Error(Errc::ConfigError, "problem.L must be positive");
  if (problem.contains("N")) {
    if (!problem.at("N").is_number_integer())
      throw Error(Errc::ConfigError, "problem.N must be an integer");
    config.grid_points = problem.at("N").get<int>();
  }
  if (config.grid_points < 16)
    throw Error(Errc::ConfigError, "problem.N must be at least 16");
  config.phase_anchor =
      get_number(problem, "phase_anchor", config.phase_anchor);
  if (!(config.phase_anchor > 0.0 && config.phase_anchor < 1.0))
    throw Error(Errc::ConfigError, "phase_anchor must lie in (0,1)");

  if (doc.contains("geometry")) {
    const json& geometry = doc.at("geometry");
    check_keys(geometry, {"box", "resolution", "band_tol", "margin"},
               "geometry");
    if (geometry.contains("box") && !geometry.at("box").is_string()) {
      config.bounding_box = get_point(geometry, "box", n);
      if ((config.bounding_box.array() <= 0.0).any())
        throw Error(Errc::ConfigError, "geometry.box must be positive");
    } else if (geometry.contains("box") &&
               geometry.at("box").get<std::string>() != "auto") {
      throw Error(Errc::ConfigError, "geometry.box must be a list or \"auto\"");
    }
    if (geometry.contains("resolution")) {
      if (!geometry.at("resolution").is_number_integer())
        throw Error(Errc::ConfigError, "geometry.resolution must be integer");
      config.resolution = geometry.at("resolution").get<int>();
      if (config.resolution < 2)
        throw Error(Errc::ConfigError, "geometry.resolution must be >= 2");
    }
    config.band_tol = get_number(geometry, "band_tol", config.band_tol);
    if (!(config.band_tol > 0.0))
      throw Error(Errc::ConfigError, "geometry.band_tol must be positive");
    config.margin = get_number(geometry, "margin", config.margin);
    if (!(config.margin >= 0.0 && config.margin < 1.0))
      throw Error(Errc::ConfigError, "geometry.margin must lie in [0,1)");
  }

  if (doc.contains("sweep")) {
    const json& sweep = doc.at("sweep");
    if (n == 2) {
      check_keys(sweep, {"alpha", "beta"}, "sweep");
      config.sweep_levels = {sweep_axis(sweep, "alpha"),
                             sweep_axis(sweep, "beta")};
    } else {
      check_keys(sweep, {"alpha", "beta", "gamma"}, "sweep");
      config.sweep_levels = {sweep_axis(sweep, "alpha"),
                             sweep_axis(sweep, "beta"),
                             sweep_axis(sweep, "gamma")};
    }
  } else {
    config.sweep_levels.assign(n, default_sweep_levels());
  }

  if (doc.contains("tolerances")) {
    const json& tolerances = doc.at("tolerances");
    check_keys(tolerances, {"tol_verify", "newton_tol", "equilibrium_tol"},
               "tolerances");
    config.tol_verify = get_number(tolerances, "tol_verify", config.tol_verify);
    config.newton_tol = get_number(tolerances, "newton_tol", config.newton_tol);
    config.equilibrium_tol =
        get_number(tolerances, "equilibrium_tol", config.equilibrium_tol);
    for (double tol : {config.tol_verify, config.newton_tol,
                       config.equilibrium_tol})
      if (!(tol > 0.0))
        throw Error(Errc::ConfigError, "tolerances must be positive");
  }

  if (doc.contains("output")) {
    const json& output = doc.at("output");
    check_keys(output, {"export_weights"}, "output");
    if (output.contains("export_weights")) {
      config.export_weights = get_point(output, "export_weights", n);
      if ((config.export_weights.array() <= 0.0).any())
        throw Error(Errc::ConfigError, "export_weights must be positive");
    }
  }
  if (config.export_weights.size() == 0)
    config.export_weights = Vec::Ones(n);

  return config;
}

namespace {

void write_json_atomic(const std::filesystem::path& path, const json& doc) {
  detail::write_file_atomic(path, doc.dump(2) + "\n");
}

void append_run_log(const std::filesystem::path& out_dir,
                    const std::string& command) {
  // Timestamps live here and only here; data artifacts stay reproducible.
  const auto now = std::chrono::system_clock::now();
  const auto t = std::chrono::system_clock::to_time_t(now);
  std::ofstream os(out_dir / "run.log", std::ios::app);
  char buf[32];
  std::strftime(buf, sizeof buf, "%F %T", std::gmtime(&t));
  os << buf << "Z " << command << "\n";
}

HypothesesOptions hypotheses_options(const ExperimentConfig& config) {
  HypothesesOptions options;
  options.bounding_box = config.bounding_box;
  options.resolution = config.resolution;
  options.band_tol = config.band_tol;
  options.margin = std::max(config.margin, 0.01);
  options.tol = config.equilibrium_tol;
  return options;
}

Vec resolve_box(const ExperimentConfig& config) {
  if (config.bounding_box.size()) return config.bounding_box;
  AxisRootsResult axis = check_axis_roots(config.system,
                                          config.equilibrium_tol);
  if (axis.status != CheckStatus::pass)
    throw Error(Errc::DomainError,
                "cannot auto-size the bounding box: " + axis.message);
  return Vec::Constant(config.system.n_species, 2.0 * axis.roots.maxCoeff());
}

int resolution_or_default(const ExperimentConfig& config) {
  if (config.resolution > 0) return config.resolution;
  return config.system.n_species == 2 ? 201 : 41;
}

struct FittedGeometry {
  std::vector<NullclineSample> samples;
  Region region;
};

FittedGeometry fit_geometry(const ExperimentConfig& config) {
  FittedGeometry result;
  const Vec box = resolve_box(config);
  result.samples = sample_nullclines(config.system, box,
                                     resolution_or_default(config),
                                     config.band_tol);
  result.region = fit_region(result.samples, config.margin);
  return result;
}

std::vector<Vec> config_weight_grid(const ExperimentConfig& config) {
  const int n = config.system.n_species;
  std::vector<Vec> grid;
  const auto& levels = config.sweep_levels;
  if (n == 2) {
    for (double a : levels[0])
      for (double b : levels[1]) {
        Vec w(2);
        w << a, b;
        grid.push_back(std::move(w));
      }
  } else {
    for (double a : levels[0])
      for (double b : levels[1])
        for (double c : levels[2]) {
          Vec w(3);
          w << a, b, c;
          grid.push_back(std::move(w));
        }
  }
  return grid;
}

WaveSolution solve_configured_wave(const ExperimentConfig& config) {
  WaveProblem problem;
  problem.system = config.system;
  problem.e_minus = classify_boundary_state(config.system, config.e_minus,
                                            config.equilibrium_tol);
  problem.e_plus = classify_boundary_state(config.system, config.e_plus,
                                           config.equilibrium_tol);
  problem.theta = config.theta;
  problem.half_length = config.half_length;
  problem.grid_points = config.grid_points;

  NewtonOptions newton;
  newton.tol = config.newton_tol;
  if (config.theta) return solve_bvp(problem, {}, newton);
  return solve_bvp_free_speed(problem, {}, config.phase_anchor, newton);
}

json solve_metadata(const WaveSolution& wave) {
  return {{"theta", wave.theta},
          {"residual", wave.residual},
          {"bc_mismatch", wave.bc_mismatch},
          {"L", wave.problem.half_length},
          {"N", wave.problem.grid_points},
          {"e_minus", std::vector<double>(wave.problem.e_minus.point.begin(),
                                          wave.problem.e_minus.point.end())},
          {"e_plus", std::vector<double>(wave.problem.e_plus.point.begin(),
                                         wave.problem.e_plus.point.end())},
          {"e_minus_kind", to_string(wave.problem.e_minus.kind)},
          {"e_plus_kind", to_string(wave.problem.e_plus.kind)}};
}

}  // namespace

int run_check(const ExperimentConfig& config,
              const std::filesystem::path& out_dir) {
  std::filesystem::create_directories(out_dir);
  append_run_log(out_dir, "check");
  HypothesisReport report =
      verify_hypotheses(config.system, hypotheses_options(config));
  write_json_atomic(out_dir / "hypotheses.json", report_to_json(report));
  std::cout << render_report_table(report);
  return report.all_pass() ? 0 : 1;
}

int run_bounds(const ExperimentConfig& config,
               const std::filesystem::path& out_dir) {
  std::filesystem::create_directories(out_dir);
  append_run_log(out_dir, "bounds");
  FittedGeometry geometry = fit_geometry(config);
  write_samples_csv(out_dir / "samples.csv", geometry.samples);
  write_region_csv(out_dir / "region.csv", geometry.region);
  write_json_atomic(out_dir / "region.json", region_to_json(geometry.region));

  const int chi = chi_indicator(
      classify_boundary_state(config.system, config.e_minus,
                              config.equilibrium_tol),
      classify_boundary_state(config.system, config.e_plus,
                              config.equilibrium_tol));
  const int n = config.system.n_species;
  json entries = json::array();
  std::cout << "  alpha   beta" << (n == 3 ? "   gamma" : "")
            << "   p_lower   p_upper\n";
  for (const Vec& tuple : config_weight_grid(config)) {
    Weights weights(tuple);
    const BoundsResult bounds =
        n == 2 ? bounds_two(weights, config.system.diffusion, geometry.region,
                            chi)
               : bounds_three(weights, config.system.diffusion,
                              geometry.region, chi);
    entries.push_back(bounds_to_json(bounds));
    std::cout << "  ";
    for (int k = 0; k < n; ++k) std::cout << tuple[k] << "   ";
    std::cout << bounds.p_lower << "   " << bounds.p_upper << "\n";
  }
  write_json_atomic(out_dir / "bounds.json",
                    {{"chi", chi},
                     {"region", region_to_json(geometry.region)},
                     {"entries", std::move(entries)}});
  return 0;
}

int run_solve(const ExperimentConfig& config,
              const std::filesystem::path& out_dir) {
  std::filesystem::create_directories(out_dir);
  append_run_log(out_dir, "solve");
  WaveSolution wave = solve_configured_wave(config);
  write_wave_csv(out_dir / "wave.csv", wave, config.export_weights);
  write_json_atomic(out_dir / "solve.json", solve_metadata(wave));
  std::cout << "  theta = " << wave.theta << ", residual = " << wave.residual
            << "\n";
  return 0;
}

int run_verify(const ExperimentConfig& config,
               const std::filesystem::path& out_dir) {
  std::filesystem::create_directories(out_dir);
  append_run_log(out_dir, "verify");

  HypothesisReport hypotheses =
      verify_hypotheses(config.system, hypotheses_options(config));
  write_json_atomic(out_dir / "hypotheses.json", report_to_json(hypotheses));
  if (!hypotheses.all_pass()) {
    std::cout << render_report_table(hypotheses);
    std::cerr << "structural hypotheses fail; not solving\n";
    return 1;
  }

  FittedGeometry geometry = fit_geometry(config);
  write_samples_csv(out_dir / "samples.csv", geometry.samples);
  write_region_csv(out_dir / "region.csv", geometry.region);
  write_json_atomic(out_dir / "region.json", region_to_json(geometry.region));

  WaveSolution wave = solve_configured_wave(config);
  write_wave_csv(out_dir / "wave.csv", wave, config.export_weights);
  write_json_atomic(out_dir / "solve.json", solve_metadata(wave));

  const int chi = chi_indicator(wave.problem.e_minus, wave.problem.e_plus);
  VerificationReport report =
      sweep_weights(wave, geometry.region, chi, config_weight_grid(config),
                    config.tol_verify);
  write_json_atomic(out_dir / "verification.json",
                    verification_to_json(report));
  write_verification_csv(out_dir / "verification.csv", report);

  int passes = 0;
  for (const auto& r : report.records) passes += r.pass;
  std::cout << "  theta = " << wave.theta << ", residual = " << wave.residual
            << "\n  sweep: " << passes << "/" << report.records.size()
            << " tuples pass at tol " << report.tol_verify << "\n  overall: "
            << (report.overall ? "pass" : "fail") << "\n";
  return report.overall ? 0 : 1;
}

int run_main(int argc, char** argv) {
  CLI::App app{"N-barrier maximum principle toolkit for competition-diffusion "
               "traveling waves"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir = "out";
  std::vector<std::string> overrides;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--config", config_path, "experiment config (JSON)")
        ->required();
    cmd->add_option("--out", out_dir, "output directory");
    cmd->add_option("--override", overrides,
                    "dot-path override, e.g. problem.theta=free");
  };
  CLI::App* check = app.add_subcommand("check", "verify structural hypotheses");
  CLI::App* bounds = app.add_subcommand("bounds", "evaluate a-priori bounds");
  CLI::App* solve = app.add_subcommand("solve", "compute the wave profile");
  CLI::App* verify =
      app.add_subcommand("verify", "solve and check bounds along the wave");
  for (CLI::App* cmd : {check, bounds, solve, verify}) add_common(cmd);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    const ExperimentConfig config = load_config(config_path, overrides);
    if (check->parsed()) return run_check(config, out_dir);
    if (bounds->parsed()) return run_bounds(config, out_dir);
    if (solve->parsed()) return run_solve(config, out_dir);
    return run_verify(config, out_dir);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return e.code() == Errc::ConfigError ? 2 : 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace nbarrier::cli
