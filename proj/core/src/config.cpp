#include "romswe/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include <json.hpp>

#include "romswe/error.hpp"

namespace romswe {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double to_double(const std::string& key, const std::string& v) {
  double out = 0.0;
  const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || p != v.data() + v.size() || !std::isfinite(out))
    throw ConfigError("'" + key + "': expected a number, got '" + v + "'");
  return out;
}

long long to_int(const std::string& key, const std::string& v) {
  long long out = 0;
  const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || p != v.data() + v.size())
    throw ConfigError("'" + key + "': expected an integer, got '" + v + "'");
  return out;
}

bool to_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw ConfigError("'" + key + "': expected a boolean, got '" + v + "'");
}

std::vector<std::string> split_list(const std::string& v) {
  std::vector<std::string> out;
  std::stringstream in(v);
  std::string item;
  while (std::getline(in, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

std::vector<int> to_int_list(const std::string& key, const std::string& v) {
  std::vector<int> out;
  for (const auto& item : split_list(v)) out.push_back(static_cast<int>(to_int(key, item)));
  if (out.empty()) throw ConfigError("'" + key + "': empty list");
  return out;
}

void apply_defaults(ExperimentConfig& c) {
  c.mu_min = 4.0 * std::numbers::pi / 18.0;
  c.mu_max = 8.0 * std::numbers::pi / 18.0;
  switch (c.command) {
    case Command::parametric:
      c.steps = 300;
      c.stride = 2;
      c.tolerances.fill(1e-10);
      c.tol_scale = TolScale::absolute;
      c.scale_coordinates = true;
      c.r_list = {5, 10, 15};
      break;
    case Command::prediction:
      c.r_list = {10, 20};
      break;
    case Command::lcurve:
      c.r_list = {20};
      break;
    default:
      break;
  }
}

void apply(ExperimentConfig& c, const std::string& key, const std::string& v) {
  if (key == "grid") c.grid = static_cast<int>(to_int(key, v));
  else if (key == "length") c.length = to_double(key, v);
  else if (key == "mean_height") c.mean_height = to_double(key, v);
  else if (key == "height_amplitude") c.height_amplitude = to_double(key, v);
  else if (key == "gravity") c.gravity = to_double(key, v);
  else if (key == "sigma_x") c.sigma_x = to_double(key, v);
  else if (key == "sigma_y") c.sigma_y = to_double(key, v);
  else if (key == "offset_x") c.offset_x = to_double(key, v);
  else if (key == "offset_y") c.offset_y = to_double(key, v);
  else if (key == "dt") c.dt = to_double(key, v);
  else if (key == "steps") c.steps = static_cast<int>(to_int(key, v));
  else if (key == "coriolis") { c.coriolis = to_double(key, v); c.latitude.reset(); }
  else if (key == "latitude") c.latitude = to_double(key, v);
  else if (key == "r") c.r_list = to_int_list(key, v);
  else if (key == "svd") {
    if (v == "deterministic") c.svd = SvdMethod::deterministic;
    else if (v == "randomized") c.svd = SvdMethod::randomized;
    else throw ConfigError("'svd': expected deterministic or randomized");
  } else if (key == "oversampling") c.oversampling = static_cast<int>(to_int(key, v));
  else if (key == "power_iterations") c.power_iterations = static_cast<int>(to_int(key, v));
  else if (key == "stride") c.stride = static_cast<int>(to_int(key, v));
  else if (key == "reprojection") {
    if (v == "none" || v == "false") c.reprojection = Reprojection::none;
    else if (v == "open_loop" || v == "true") c.reprojection = Reprojection::open_loop;
    else if (v == "closed_loop") c.reprojection = Reprojection::closed_loop;
    else throw ConfigError("'reprojection': expected none, open_loop or closed_loop");
  } else if (key == "scale_coordinates") c.scale_coordinates = to_bool(key, v);
  else if (key == "tol_scale") {
    if (v == "relative") c.tol_scale = TolScale::relative;
    else if (v == "absolute") c.tol_scale = TolScale::absolute;
    else throw ConfigError("'tol_scale': expected relative or absolute");
  } else if (key == "tol") c.tolerances.fill(to_double(key, v));
  else if (key == "tol_h") c.tolerances[0] = to_double(key, v);
  else if (key == "tol_u") c.tolerances[1] = to_double(key, v);
  else if (key == "tol_v") c.tolerances[2] = to_double(key, v);
  else if (key == "tol_s") c.tolerances[3] = to_double(key, v);
  else if (key == "train_steps") c.train_steps = to_int_list(key, v);
  else if (key == "mu_min") c.mu_min = to_double(key, v);
  else if (key == "mu_max") c.mu_max = to_double(key, v);
  else if (key == "train_parameters") c.train_parameters = static_cast<int>(to_int(key, v));
  else if (key == "test_parameters") c.test_parameters = static_cast<int>(to_int(key, v));
  else if (key == "perturbation") c.perturbation = to_double(key, v);
  else if (key == "field_dump_r") c.field_dump_r = static_cast<int>(to_int(key, v));
  else if (key == "lcurve_min_exponent") c.lcurve_min_exponent = to_double(key, v);
  else if (key == "lcurve_max_exponent") c.lcurve_max_exponent = to_double(key, v);
  else if (key == "lcurve_per_decade") c.lcurve_per_decade = static_cast<int>(to_int(key, v));
  else if (key == "seed") {
    const long long s = to_int(key, v);
    if (s < 0) throw ConfigError("'seed' must be non-negative");
    c.seed = static_cast<std::uint64_t>(s);
  } else if (key == "solver") {
    if (v == "auto") c.solver = LinearSolver::automatic;
    else if (v == "sparse_lu") c.solver = LinearSolver::sparse_lu;
    else if (v == "bicgstab") c.solver = LinearSolver::bicgstab;
    else throw ConfigError("'solver': expected auto, sparse_lu or bicgstab");
  } else if (key == "out") c.out_dir = v;
  else throw ConfigError("unknown configuration key '" + key + "'");
}

}  // namespace

Command parse_command(const std::string& name) {
  for (Command c : {Command::fom, Command::pod, Command::nonparametric, Command::prediction, Command::parametric,
                    Command::lcurve})
    if (command_name(c) == name) return c;
  throw ConfigError("unknown command '" + name + "'");
}

std::string command_name(Command c) {
  switch (c) {
    case Command::fom: return "fom";
    case Command::pod: return "pod";
    case Command::nonparametric: return "nonparametric";
    case Command::prediction: return "prediction";
    case Command::parametric: return "parametric";
    case Command::lcurve: return "lcurve";
  }
  return "?";
}

const std::vector<std::string>& config_keys() {
  static const std::vector<std::string> keys{
      "grid", "length", "mean_height", "height_amplitude", "gravity", "sigma_x", "sigma_y", "offset_x",
      "offset_y", "dt", "steps", "coriolis", "latitude", "r", "svd", "oversampling", "power_iterations",
      "stride", "reprojection", "scale_coordinates", "tol_scale", "tol", "tol_h", "tol_u", "tol_v", "tol_s", "train_steps",
      "mu_min", "mu_max", "train_parameters", "test_parameters", "perturbation", "field_dump_r",
      "lcurve_min_exponent", "lcurve_max_exponent", "lcurve_per_decade", "seed", "solver", "out"};
  return keys;
}

ConfigValues parse_config_text(const std::string& text) {
  ConfigValues out;
  std::istringstream in(text);
  std::string line;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("line " + std::to_string(number) + ": expected 'key = value'");
    const std::string key = trim(line.substr(0, eq)), value = trim(line.substr(eq + 1));
    if (key.empty() || value.empty())
      throw ConfigError("line " + std::to_string(number) + ": empty key or value");
    if (!out.emplace(key, value).second)
      throw ConfigError("line " + std::to_string(number) + ": duplicate key '" + key + "'");
  }
  return out;
}

ConfigValues read_config_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config_text(buf.str());
}

ExperimentConfig resolve_config(Command command, const std::vector<ConfigValues>& layers) {
  ExperimentConfig c;
  c.command = command;
  apply_defaults(c);
  for (const auto& layer : layers)
    for (const auto& [k, v] : layer) apply(c, k, v);
  validate(c);
  return c;
}

void validate(const ExperimentConfig& c) {
  auto require = [](bool ok, const std::string& what) {
    if (!ok) throw ConfigError(what);
  };
  require(c.grid >= 3, "grid must be at least 3");
  require(c.length > 0 && c.mean_height > 0 && c.height_amplitude > 0 && c.gravity > 0,
          "physical scales must be positive");
  require(!c.sigma_x || *c.sigma_x > 0, "sigma_x must be positive");
  require(!c.sigma_y || *c.sigma_y > 0, "sigma_y must be positive");
  require(c.dt > 0, "dt must be positive");
  require(c.steps >= 1, "steps must be at least 1");
  require(c.params().f != 0.0, "the Coriolis parameter must be nonzero");
  for (int r : c.r_list) require(r >= 1, "reduced dimensions must be positive");
  require(c.stride >= 1, "stride must be at least 1");
  require(c.oversampling >= 0 && c.power_iterations >= 0, "rSVD parameters must be non-negative");
  for (double t : c.tolerances) require(t >= 0, "tolerances must be non-negative");
  if (c.command == Command::prediction) {
    require(!c.train_steps.empty(), "train_steps must not be empty");
    for (int k : c.train_steps) require(k >= 1 && k < c.steps, "train_steps must lie in [1, steps)");
  }
  if (c.command == Command::parametric) {
    require(c.mu_min < c.mu_max, "mu_min must be below mu_max");
    require(std::sin(c.mu_min) * std::sin(c.mu_max) > 0, "the parameter range must not contain a zero of f");
    require(c.train_parameters >= 1 && c.test_parameters >= 0, "invalid parameter counts");
    require(c.perturbation >= 0, "perturbation must be non-negative");
  }
  if (c.command == Command::lcurve) {
    require(c.lcurve_per_decade >= 1 && c.lcurve_min_exponent < c.lcurve_max_exponent, "invalid L-curve grid");
  }
}

DoubleVortexScenario ExperimentConfig::scenario() const {
  DoubleVortexScenario sc = DoubleVortexScenario::with_length(length);
  sc.mean_height = mean_height;
  sc.height_amplitude = height_amplitude;
  if (sigma_x) sc.sigma_x = *sigma_x;
  if (sigma_y) sc.sigma_y = *sigma_y;
  sc.offset_x = offset_x;
  sc.offset_y = offset_y;
  return sc;
}

PhysicalParams ExperimentConfig::params() const {
  return latitude ? PhysicalParams::at_latitude(*latitude, gravity) : PhysicalParams::with_coriolis(coriolis, gravity);
}

Grid ExperimentConfig::make_grid() const { return Grid::square(grid, length); }

std::string config_to_json(const ExperimentConfig& c) {
  nlohmann::ordered_json j;
  j["command"] = command_name(c.command);
  j["grid"] = c.grid;
  j["length"] = c.length;
  j["mean_height"] = c.mean_height;
  j["height_amplitude"] = c.height_amplitude;
  j["gravity"] = c.gravity;
  const DoubleVortexScenario sc = c.scenario();
  j["sigma_x"] = sc.sigma_x;
  j["sigma_y"] = sc.sigma_y;
  j["offset_x"] = c.offset_x;
  j["offset_y"] = c.offset_y;
  j["dt"] = c.dt;
  j["steps"] = c.steps;
  j["coriolis"] = c.params().f;
  j["latitude"] = c.latitude ? nlohmann::ordered_json(*c.latitude) : nlohmann::ordered_json(nullptr);
  j["r"] = c.r_list;
  j["svd"] = c.svd == SvdMethod::deterministic ? "deterministic" : "randomized";
  j["oversampling"] = c.oversampling;
  j["power_iterations"] = c.power_iterations;
  j["stride"] = c.stride;
  j["reprojection"] = c.reprojection == Reprojection::none        ? "none"
                      : c.reprojection == Reprojection::open_loop ? "open_loop"
                                                                  : "closed_loop";
  j["scale_coordinates"] = c.scale_coordinates;
  j["tol_scale"] = c.tol_scale == TolScale::absolute ? "absolute" : "relative";
  j["tol"] = {{"h", c.tolerances[0]}, {"u", c.tolerances[1]}, {"v", c.tolerances[2]}, {"s", c.tolerances[3]}};
  j["train_steps"] = c.train_steps;
  j["mu_min"] = c.mu_min;
  j["mu_max"] = c.mu_max;
  j["train_parameters"] = c.train_parameters;
  j["test_parameters"] = c.test_parameters;
  j["perturbation"] = c.perturbation;
  j["field_dump_r"] = c.field_dump_r;
  j["lcurve_min_exponent"] = c.lcurve_min_exponent;
  j["lcurve_max_exponent"] = c.lcurve_max_exponent;
  j["lcurve_per_decade"] = c.lcurve_per_decade;
  j["seed"] = c.seed;
  j["solver"] = c.solver == LinearSolver::automatic ? "auto" : c.solver == LinearSolver::sparse_lu ? "sparse_lu" : "bicgstab";
  j["out"] = c.out_dir.string();
  return j.dump(2);
}

}  // namespace romswe
