#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "romswe/fom.hpp"
#include "romswe/lstsq.hpp"
#include "romswe/pod.hpp"

namespace romswe {

enum class Command { fom, pod, nonparametric, prediction, parametric, lcurve };

Command parse_command(const std::string& name);
std::string command_name(Command c);

enum class Reprojection { none, open_loop, closed_loop };

/// Resolved settings of one experiment run. Defaults follow the double-vortex
/// study; `resolve_config` applies per-command defaults first.
struct ExperimentConfig {
  Command command = Command::nonparametric;

  int grid = 120;
  double length = 5.0e6;
  double mean_height = 750.0;
  double height_amplitude = 75.0;
  double gravity = kDefaultGravity;
  std::optional<double> sigma_x;  // default 3L/40
  std::optional<double> sigma_y;
  double offset_x = 0.1;
  double offset_y = 0.1;

  double dt = 486.0;
  int steps = 250;
  double coriolis = 6.147e-5;
  std::optional<double> latitude;

  std::vector<int> r_list{5, 10, 20};
  SvdMethod svd = SvdMethod::deterministic;
  int oversampling = 10;
  int power_iterations = 2;

  int stride = 1;
  Reprojection reprojection = Reprojection::open_loop;
  bool scale_coordinates = false;
  std::array<double, 4> tolerances{1e-12, 1e-12, 1e-12, 1e-12};
  TolScale tol_scale = TolScale::relative;

  std::vector<int> train_steps{120, 180};

  /// Latitude range of the parametric study; filled in by resolve_config.
  double mu_min = 0.0;
  double mu_max = 0.0;
  int train_parameters = 6;
  int test_parameters = 7;
  /// Training initial conditions use offset_y + gamma, gamma ~ U(-p, p).
  double perturbation = 0.05;
  /// Reduced dimension of the final-time field dump in the parametric study.
  int field_dump_r = 10;

  double lcurve_min_exponent = -16.0;
  double lcurve_max_exponent = -2.0;
  int lcurve_per_decade = 2;

  std::uint64_t seed = 0;
  LinearSolver solver = LinearSolver::automatic;
  std::filesystem::path out_dir;

  DoubleVortexScenario scenario() const;
  PhysicalParams params() const;
  Grid make_grid() const;
};

using ConfigValues = std::map<std::string, std::string>;

/// Reads `key = value` lines; `#` starts a comment. Throws ConfigError with
/// the line number on malformed lines or duplicate keys.
ConfigValues parse_config_text(const std::string& text);
ConfigValues read_config_file(const std::filesystem::path& path);

/// Per-command defaults, then `values` (later maps win). Throws ConfigError
/// on unknown keys, unparsable values, or invalid combinations.
ExperimentConfig resolve_config(Command command, const std::vector<ConfigValues>& layers);

/// Throws ConfigError when a setting is out of range.
void validate(const ExperimentConfig& config);

/// The resolved configuration as a JSON object text.
std::string config_to_json(const ExperimentConfig& config);

/// Keys accepted by resolve_config.
const std::vector<std::string>& config_keys();

}  // namespace romswe
