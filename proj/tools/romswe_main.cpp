#include <cstdio>
#include <exception>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "romswe/config.hpp"
#include "romswe/error.hpp"
#include "romswe/experiment.hpp"

namespace {

struct Flags {
  std::string config;
  std::optional<long long> seed;
  std::string out;
  std::optional<int> grid;
  std::string r_list;
  std::optional<int> stride;
  bool no_reprojection = false;
  std::string tol;
  std::vector<std::string> set;
};

void add_flags(CLI::App* cmd, Flags& f) {
  cmd->add_option("--config", f.config, "flat key = value configuration file");
  cmd->add_option("--seed", f.seed, "seed of the single random generator");
  cmd->add_option("--out", f.out, "output directory");
  cmd->add_option("--grid", f.grid, "grid points per axis");
  cmd->add_option("--r", f.r_list, "comma-separated reduced dimensions");
  cmd->add_option("--stride", f.stride, "snapshot subsampling factor");
  cmd->add_flag("--no-reprojection", f.no_reprojection, "learn from plainly projected snapshots");
  cmd->add_option("--tol", f.tol, "least-squares drop tolerance for all four equations");
  cmd->add_option("--set", f.set, "extra key=value overrides")->expected(0, -1);
}

romswe::ConfigValues overrides(const Flags& f) {
  romswe::ConfigValues v;
  if (f.seed) v["seed"] = std::to_string(*f.seed);
  if (!f.out.empty()) v["out"] = f.out;
  if (f.grid) v["grid"] = std::to_string(*f.grid);
  if (!f.r_list.empty()) v["r"] = f.r_list;
  if (f.stride) v["stride"] = std::to_string(*f.stride);
  if (f.no_reprojection) v["reprojection"] = "none";
  if (!f.tol.empty()) v["tol"] = f.tol;
  for (const auto& kv : f.set) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw romswe::ConfigError("--set expects key=value, got '" + kv + "'");
    v[kv.substr(0, eq)] = kv.substr(eq + 1);
  }
  return v;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Reduced-order models of the rotating thermal shallow water equations"};
  app.require_subcommand(1);
  Flags flags;
  const std::vector<std::pair<std::string, std::string>> commands{
      {"fom", "run the full-order model and record its invariants"},
      {"pod", "build POD bases and report projection errors"},
      {"nonparametric", "Galerkin and OpInf errors over the reduced dimensions"},
      {"prediction", "train on a prefix of the trajectory and predict the rest"},
      {"parametric", "train over latitudes and test on random ones"},
      {"lcurve", "L-curves and singular values of the OpInf data matrices"}};
  for (const auto& [name, help] : commands) add_flags(app.add_subcommand(name, help), flags);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    const romswe::Command command = romswe::parse_command(app.get_subcommands().front()->get_name());
    std::vector<romswe::ConfigValues> layers;
    if (!flags.config.empty()) layers.push_back(romswe::read_config_file(flags.config));
    layers.push_back(overrides(flags));
    const romswe::ExperimentConfig config = romswe::resolve_config(command, layers);
    romswe::run_experiment(config);
    if (!config.out_dir.empty()) std::printf("wrote %s\n", config.out_dir.string().c_str());
  } catch (const romswe::ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
