#include "romswe/experiment.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <limits>
#include <random>

#include <Eigen/SVD>
#include <json.hpp>

#include "romswe/error.hpp"
#include "romswe/galerkin.hpp"
#include "romswe/matrix_io.hpp"
#include "romswe/parallel.hpp"

namespace romswe {

namespace {

using Json = nlohmann::ordered_json;
using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

template <typename F>
auto stage(const std::string& name, F&& body) {
  try {
    return body();
  } catch (const std::exception& e) {
    throw Error("stage '" + name + "' failed: " + e.what());
  }
}

std::string num(double v) { return format_double(v); }
std::string num(long long v) { return std::to_string(v); }
std::string num(int v) { return std::to_string(v); }

constexpr std::array<const char*, 4> kNames{"h", "u", "v", "s"};

class Table {
public:
  explicit Table(std::vector<std::string> columns) : columns_(std::move(columns)) {}
  void add(std::vector<std::string> cells) {
    if (cells.size() != columns_.size()) throw ShapeError("table row width differs from the header");
    rows_.push_back(std::move(cells));
  }
  void write(const ExperimentConfig& config, const std::string& name) const {
    if (config.out_dir.empty()) return;
    std::ofstream out(config.out_dir / (name + ".csv"));
    if (!out) throw Error("cannot write " + (config.out_dir / (name + ".csv")).string());
    auto line = [&](const std::vector<std::string>& cells) {
      for (std::size_t i = 0; i < cells.size(); ++i) out << (i ? "," : "") << cells[i];
      out << '\n';
    };
    line(columns_);
    for (const auto& r : rows_) line(r);
    Json side;
    side["file"] = name + ".csv";
    side["columns"] = columns_;
    side["rows"] = rows_.size();
    side["config"] = Json::parse(config_to_json(config));
    std::ofstream(config.out_dir / (name + ".json")) << side.dump(2) << '\n';
  }

private:
  std::vector<std::string> columns_;
  std::vector<std::vector<std::string>> rows_;
};

void prepare_output(const ExperimentConfig& config) {
  if (config.out_dir.empty()) return;
  std::filesystem::create_directories(config.out_dir);
  std::ofstream(config.out_dir / "config.json") << config_to_json(config) << '\n';
}

void write_summary(const ExperimentConfig& config, Json summary) {
  if (config.out_dir.empty()) return;
  summary["config"] = Json::parse(config_to_json(config));
  std::ofstream(config.out_dir / "summary.json") << summary.dump(2) << '\n';
}

KahanOptions kahan_options(const ExperimentConfig& config) {
  KahanOptions o;
  o.solver = config.solver;
  return o;
}

PodOptions pod_options(const ExperimentConfig& config) {
  PodOptions o;
  o.method = config.svd;
  o.oversampling = config.oversampling;
  o.power_iterations = config.power_iterations;
  o.seed = config.seed;
  return o;
}

InferOptions infer_options(const ExperimentConfig& config) {
  InferOptions o;
  o.scale_coordinates = config.scale_coordinates;
  o.tol_scale = config.tol_scale;
  return o;
}

Json conserved_json(const ConservedQuantities& q) {
  return Json{{"energy", q.energy}, {"mass", q.mass}, {"vorticity", q.vorticity}, {"buoyancy", q.buoyancy}};
}

Json diagnostics_json(const OpInfDiagnostics& d) {
  Json j;
  for (int e = 0; e < 4; ++e)
    j[kNames[e]] = Json{{"rank", d.ranks[e]}, {"condition_number", d.condition_numbers[e]}, {"residual", d.residuals[e]}};
  j["warnings"] = d.warnings;
  return j;
}

OpInfDiagnostics diagnostics_of(const OpInfRom& rom, const std::vector<std::string>& extra = {}) {
  OpInfDiagnostics d{rom.ranks, rom.condition_numbers, rom.residuals, rom.warnings};
  d.warnings.insert(d.warnings.end(), extra.begin(), extra.end());
  return d;
}

/// Stacked states at steps 1 ... K.
Eigen::MatrixXd reference_states(const FomResult& fom) {
  return fom.trajectory.states.rightCols(fom.trajectory.steps());
}

void add_conserved_rows(Table& table, const std::string& model, int r, const ConservationSummary& c) {
  table.add({model, num(r), num(c.mean_error.energy), num(c.mean_error.vorticity), num(c.mean_error.mass),
             num(c.mean_error.buoyancy), num(c.slope.energy), num(c.slope.vorticity), num(c.slope.mass),
             num(c.slope.buoyancy)});
}

void add_series_rows(Table& table, const std::string& model, int r, const ConservedErrorSeries& s) {
  for (Eigen::Index k = 0; k < s.energy.size(); ++k)
    table.add({model, num(r), num(static_cast<long long>(k + 1)), num(s.energy[k]), num(s.mass[k]),
               num(s.vorticity[k]), num(s.buoyancy[k])});
}

void dump_final_fields(const ExperimentConfig& config, const std::string& file, const FomResult& fom,
                       const PodBasis& basis, const std::vector<std::pair<std::string, const RomResult*>>& roms) {
  if (config.out_dir.empty()) return;
  MatrixBundle bundle;
  bundle.set("kind", std::string("final-fields"));
  bundle.set("grid", static_cast<long long>(config.grid));
  bundle.set("r", static_cast<long long>(basis.dim()));
  bundle.set("coriolis", fom.params.f);
  const State w = fom.trajectory.state(fom.trajectory.steps());
  for (Field f : kFields) bundle.add("fom_" + std::string(field_name(f)), w.field(f));
  for (const auto& [name, rom] : roms) {
    if (!rom->failure.empty()) continue;
    const State wr = lift(basis, rom->trajectory.states.col(rom->trajectory.steps()));
    for (Field f : kFields) bundle.add(name + "_" + std::string(field_name(f)), wr.field(f));
  }
  save_bundle(bundle, config.out_dir / file);
}

}  // namespace

ConservationSummary summarize_conservation(std::span<const ConservedQuantities> values) {
  ConservationSummary out;
  out.series = conserved_error_series(values);
  out.mean_error = {out.series.energy.mean(), out.series.mass.mean(), out.series.vorticity.mean(),
                    out.series.buoyancy.mean()};
  if (out.series.energy.size() >= 3)
    out.slope = {drift_slope(out.series.energy), drift_slope(out.series.mass), drift_slope(out.series.vorticity),
                 drift_slope(out.series.buoyancy)};
  return out;
}

FomResult run_full_model(const Grid& grid, const DiffOperators& ops, const State& initial,
                         const PhysicalParams& params, double dt, int steps, const KahanOptions& options) {
  FomResult out;
  out.params = params;
  const auto start = Clock::now();
  out.trajectory = simulate(initial, dt, steps, params, ops, options);
  out.seconds = seconds_since(start);
  out.invariants = invariant_series(out.trajectory, params, grid);
  out.conservation = summarize_conservation(out.invariants);
  return out;
}

RomResult evaluate_rom(const std::string& name, const ReducedModel& model, const PodBasis& basis,
                       const FomResult& fom, const Grid& grid, bool with_conservation) {
  RomResult out;
  out.model = name;
  out.r = basis.dim();
  const int steps = static_cast<int>(fom.trajectory.steps());
  const Eigen::VectorXd z0 = project(basis, fom.trajectory.state(0));
  const auto start = Clock::now();
  try {
    out.trajectory = simulate_reduced(model, z0, fom.trajectory.dt, steps, fom.params.f);
  } catch (const SolveError& e) {
    out.seconds = seconds_since(start);
    out.failure = e.what();
    const double inf = std::numeric_limits<double>::infinity();
    out.rel_error = out.avg_error = inf;
    out.state_errors.fill(inf);
    return out;
  }
  out.seconds = seconds_since(start);
  const Eigen::MatrixXd reference = reference_states(fom);
  const Eigen::MatrixXd lifted = lift_columns(basis, out.trajectory.states.rightCols(steps));
  out.rel_error = rel_error_global(reference, lifted);
  out.avg_error = avg_rel_error(reference, lifted, grid.cell_area()).value;
  const auto per_state = avg_rel_error_state(reference, lifted, grid.cell_area());
  for (int j = 0; j < 4; ++j) out.state_errors[j] = per_state[j].value;
  if (with_conservation) {
    std::vector<ConservedQuantities> values;
    values.reserve(steps + 1);
    for (int k = 0; k <= steps; ++k)
      values.push_back(conserved_quantities(lift(basis, out.trajectory.states.col(k)), fom.params, grid));
    out.conservation = summarize_conservation(values);
  }
  return out;
}

ReducedData training_data(const ExperimentConfig& config, const FomResult& fom, const PodBasis& basis,
                          const DiffOperators& ops, int last_step) {
  const int steps = last_step < 0 ? static_cast<int>(fom.trajectory.steps()) : last_step;
  switch (config.reprojection) {
    case Reprojection::closed_loop:
      return reproject_closed_loop(fom.trajectory.state(0), basis, fom.params, ops, fom.trajectory.dt, steps,
                                   config.stride, kahan_options(config));
    case Reprojection::open_loop:
      return reproject(collect(fom.trajectory, fom.params, ops, config.stride, steps), basis, fom.params, ops);
    case Reprojection::none:
      break;
  }
  return project_snapshots(collect(fom.trajectory, fom.params, ops, config.stride, steps), basis);
}

FomReport run_fom(const ExperimentConfig& config) {
  prepare_output(config);
  const Grid grid = config.make_grid();
  const DiffOperators ops = build_diff_2d(grid);
  const PhysicalParams params = config.params();
  FomReport report;
  report.fom = stage("fom", [&] {
    return run_full_model(grid, ops, double_vortex_initial(grid, params, config.scenario()), params, config.dt,
                          config.steps, kahan_options(config));
  });
  const FomResult& fom = report.fom;

  Table inv({"step", "time", "energy", "mass", "vorticity", "buoyancy", "energy_error", "mass_error",
             "vorticity_error", "buoyancy_error"});
  for (std::size_t k = 0; k < fom.invariants.size(); ++k) {
    const auto& q = fom.invariants[k];
    const auto& s = fom.conservation.series;
    auto err = [&](const Eigen::VectorXd& v) { return k == 0 ? 0.0 : v[static_cast<Eigen::Index>(k) - 1]; };
    inv.add({num(static_cast<long long>(k)), num(fom.trajectory.time(static_cast<Eigen::Index>(k))), num(q.energy),
             num(q.mass), num(q.vorticity), num(q.buoyancy), num(err(s.energy)), num(err(s.mass)),
             num(err(s.vorticity)), num(err(s.buoyancy))});
  }
  inv.write(config, "invariants");
  if (!config.out_dir.empty())
    stage("snapshots", [&] {
      save_snapshots(collect(fom.trajectory, fom.params, ops, config.stride), config.out_dir / "snapshots.bin");
      return 0;
    });
  write_summary(config, Json{{"fom_seconds", fom.seconds},
                             {"conserved_mean_error", conserved_json(fom.conservation.mean_error)},
                             {"conserved_drift_slope", conserved_json(fom.conservation.slope)}});
  return report;
}

PodReport run_pod(const ExperimentConfig& config) {
  prepare_output(config);
  const Grid grid = config.make_grid();
  const DiffOperators ops = build_diff_2d(grid);
  const PhysicalParams params = config.params();
  const FomResult fom = stage("fom", [&] {
    return run_full_model(grid, ops, double_vortex_initial(grid, params, config.scenario()), params, config.dt,
                          config.steps, kahan_options(config));
  });
  const SnapshotSet snaps = collect(fom.trajectory, params, ops, config.stride);
  const std::vector<SnapshotSet> sets{snaps};
  const GlobalSnapshots global = concatenate(sets);
  const int rmax = *std::max_element(config.r_list.begin(), config.r_list.end());

  PodReport report;
  report.basis = stage("pod", [&] { return pod_basis(global, rmax, pod_options(config)); });
  const Eigen::MatrixXd w = snaps.stacked_states();
  Table errors({"r", "projection_error"});
  for (int r : config.r_list) {
    PodBasis sub;
    for (int j = 0; j < 4; ++j) sub.modes[j] = report.basis.modes[j].leftCols(r);
    const double e = rel_error_global(w, lift_columns(sub, project_columns(sub, w)));
    report.projection_errors.emplace_back(r, e);
    errors.add({num(r), num(e)});
  }
  errors.write(config, "projection_errors");

  Table sv({"index", "sigma_h", "sigma_u", "sigma_v", "sigma_s"});
  const Eigen::Index len = report.basis.singular_values[0].size();
  for (Eigen::Index i = 0; i < len; ++i)
    sv.add({num(static_cast<long long>(i + 1)), num(report.basis.singular_values[0][i]),
            num(report.basis.singular_values[1][i]), num(report.basis.singular_values[2][i]),
            num(report.basis.singular_values[3][i])});
  sv.write(config, "singular_values");
  if (!config.out_dir.empty()) save_basis(report.basis, config.out_dir / "basis.bin");
  Json ranks = Json::array();
  for (auto r : report.basis.effective_rank) ranks.push_back(r);
  write_summary(config, Json{{"fom_seconds", fom.seconds}, {"effective_rank", ranks}, {"warnings", report.basis.warnings}});
  return report;
}

NonparametricReport run_nonparametric(const ExperimentConfig& config) {
  prepare_output(config);
  const Grid grid = config.make_grid();
  const DiffOperators ops = build_diff_2d(grid);
  const PhysicalParams params = config.params();
  NonparametricReport report;
  report.fom = stage("fom", [&] {
    return run_full_model(grid, ops, double_vortex_initial(grid, params, config.scenario()), params, config.dt,
                          config.steps, kahan_options(config));
  });
  const FomResult& fom = report.fom;
  const std::vector<SnapshotSet> sets{collect(fom.trajectory, params, ops, config.stride)};
  const GlobalSnapshots global = concatenate(sets);

  Json rows_json = Json::array();
  for (int r : config.r_list) {
    NonparametricRow row;
    row.r = r;
    const PodBasis basis = stage("pod", [&] { return pod_basis(global, r, pod_options(config)); });
    const ReducedModel galerkin = stage("galerkin", [&] { return assemble_galerkin(basis, params, ops); });
    row.galerkin = stage("galerkin", [&] { return evaluate_rom("galerkin", galerkin, basis, fom, grid, true); });
    const OpInfRom opinf = stage("opinf", [&] {
      const std::vector<ReducedData> data{training_data(config, fom, basis, ops)};
      return infer_operators(data, config.tolerances, infer_options(config));
    });
    row.diagnostics = diagnostics_of(opinf, basis.warnings);
    row.opinf = stage("opinf", [&] { return evaluate_rom("opinf", opinf.model, basis, fom, grid, true); });
    if (r == config.r_list.back())
      dump_final_fields(config, "fields_final.bin", fom, basis, {{"galerkin", &row.galerkin}, {"opinf", &row.opinf}});
    rows_json.push_back(Json{{"r", r},
                             {"galerkin_seconds", row.galerkin.seconds},
                             {"opinf_seconds", row.opinf.seconds},
                             {"galerkin_speedup", fom.seconds / row.galerkin.seconds},
                             {"opinf_speedup", fom.seconds / row.opinf.seconds},
                             {"galerkin_failure", row.galerkin.failure},
                             {"opinf_failure", row.opinf.failure},
                             {"opinf", diagnostics_json(row.diagnostics)}});
    report.rows.push_back(std::move(row));
  }

  Table errors({"r", "galerkin_rel_error", "opinf_rel_error", "galerkin_avg_error", "opinf_avg_error",
                "galerkin_avg_h", "galerkin_avg_u", "galerkin_avg_v", "galerkin_avg_s", "opinf_avg_h",
                "opinf_avg_u", "opinf_avg_v", "opinf_avg_s"});
  Table table({"model", "r", "energy", "vorticity", "mass", "buoyancy", "energy_slope", "vorticity_slope",
               "mass_slope", "buoyancy_slope"});
  Table series({"model", "r", "step", "energy", "mass", "vorticity", "buoyancy"});
  Table diag({"r", "equation", "tol", "rank", "condition_number", "residual"});
  add_conserved_rows(table, "fom", 0, fom.conservation);
  add_series_rows(series, "fom", 0, fom.conservation.series);
  for (const auto& row : report.rows) {
    const auto& g = row.galerkin;
    const auto& o = row.opinf;
    errors.add({num(row.r), num(g.rel_error), num(o.rel_error), num(g.avg_error), num(o.avg_error),
                num(g.state_errors[0]), num(g.state_errors[1]), num(g.state_errors[2]), num(g.state_errors[3]),
                num(o.state_errors[0]), num(o.state_errors[1]), num(o.state_errors[2]), num(o.state_errors[3])});
    for (const RomResult* rom : {&g, &o})
      if (rom->conservation) {
        add_conserved_rows(table, rom->model, row.r, *rom->conservation);
        add_series_rows(series, rom->model, row.r, rom->conservation->series);
      }
    for (int e = 0; e < 4; ++e)
      diag.add({num(row.r), kNames[e], num(config.tolerances[e]), num(static_cast<long long>(row.diagnostics.ranks[e])),
                num(row.diagnostics.condition_numbers[e]), num(row.diagnostics.residuals[e])});
  }
  errors.write(config, "errors_vs_r");
  table.write(config, "conserved_table");
  series.write(config, "conserved_series");
  diag.write(config, "opinf_diagnostics");
  write_summary(config, Json{{"fom_seconds", fom.seconds},
                             {"fom_conserved_mean_error", conserved_json(fom.conservation.mean_error)},
                             {"rows", rows_json}});
  return report;
}

PredictionReport run_prediction(const ExperimentConfig& config) {
  prepare_output(config);
  const Grid grid = config.make_grid();
  const DiffOperators ops = build_diff_2d(grid);
  const PhysicalParams params = config.params();
  PredictionReport report;
  report.fom = stage("fom", [&] {
    return run_full_model(grid, ops, double_vortex_initial(grid, params, config.scenario()), params, config.dt,
                          config.steps, kahan_options(config));
  });
  const FomResult& fom = report.fom;
  const Eigen::MatrixXd reference = reference_states(fom);

  Table table({"train_steps", "r", "model", "train_error", "prediction_error"});
  Table series({"train_steps", "r", "model", "step", "phase", "error"});
  Json timings = Json::array();
  for (int k_train : config.train_steps) {
    const std::vector<SnapshotSet> sets{collect(fom.trajectory, params, ops, config.stride, k_train)};
    const GlobalSnapshots global = concatenate(sets);
    for (int r : config.r_list) {
      const PodBasis basis = stage("pod", [&] { return pod_basis(global, r, pod_options(config)); });
      const ReducedModel galerkin = stage("galerkin", [&] { return assemble_galerkin(basis, params, ops); });
      const OpInfRom opinf = stage("opinf", [&] {
        const std::vector<ReducedData> data{training_data(config, fom, basis, ops, k_train)};
        return infer_operators(data, config.tolerances, infer_options(config));
      });
      for (const auto& [name, model] :
           std::vector<std::pair<std::string, const ReducedModel*>>{{"galerkin", &galerkin}, {"opinf", &opinf.model}}) {
        const RomResult rom = stage(name, [&] { return evaluate_rom(name, *model, basis, fom, grid, false); });
        PredictionCell cell;
        cell.train_steps = k_train;
        cell.r = r;
        cell.model = name;
        if (rom.failure.empty()) {
          const Eigen::MatrixXd lifted = lift_columns(basis, rom.trajectory.states.rightCols(fom.trajectory.steps()));
          cell.step_errors = rel_error_timestep(reference, lifted, grid.cell_area());
          cell.train_error = avg_rel_error(reference, lifted, grid.cell_area(), 0, k_train).value;
          cell.prediction_error = avg_rel_error(reference, lifted, grid.cell_area(), k_train).value;
        } else {
          cell.step_errors = Eigen::VectorXd::Constant(fom.trajectory.steps(), std::numeric_limits<double>::infinity());
          cell.train_error = cell.prediction_error = std::numeric_limits<double>::infinity();
        }
        table.add({num(k_train), num(r), name, num(cell.train_error), num(cell.prediction_error)});
        for (Eigen::Index k = 0; k < cell.step_errors.size(); ++k)
          series.add({num(k_train), num(r), name, num(static_cast<long long>(k + 1)),
                      k < k_train ? "train" : "predict", num(cell.step_errors[k])});
        timings.push_back(Json{{"train_steps", k_train}, {"r", r}, {"model", name}, {"seconds", rom.seconds},
                               {"failure", rom.failure}});
        report.cells.push_back(std::move(cell));
      }
    }
  }
  table.write(config, "prediction_table");
  series.write(config, "prediction_series");
  write_summary(config, Json{{"fom_seconds", fom.seconds}, {"roms", timings}});
  return report;
}

ParametricReport run_parametric(const ExperimentConfig& config) {
  prepare_output(config);
  const Grid grid = config.make_grid();
  const DiffOperators ops = build_diff_2d(grid);
  ParametricReport report;

  std::mt19937_64 rng(config.seed);
  std::uniform_real_distribution<double> gamma(-config.perturbation, config.perturbation);
  std::uniform_real_distribution<double> latitude(config.mu_min, config.mu_max);
  for (int i = 0; i < config.train_parameters; ++i) {
    ParametricRun run;
    run.latitude = config.train_parameters == 1
                       ? 0.5 * (config.mu_min + config.mu_max)
                       : config.mu_min + (config.mu_max - config.mu_min) * i / (config.train_parameters - 1);
    run.perturbation = config.perturbation > 0 ? gamma(rng) : 0.0;
    report.runs.push_back(run);
  }
  for (int i = 0; i < config.test_parameters; ++i) {
    ParametricRun run;
    run.train = false;
    run.latitude = latitude(rng);
    report.runs.push_back(run);
  }
  for (auto& run : report.runs) run.coriolis = coriolis_from_latitude(run.latitude);

  std::vector<FomResult> foms(report.runs.size());
  stage("fom", [&] {
    parallel_for(report.runs.size(), [&](std::size_t i) {
      const ParametricRun& run = report.runs[i];
      const PhysicalParams params = PhysicalParams::at_latitude(run.latitude, config.gravity);
      DoubleVortexScenario sc = config.scenario();
      sc.offset_y += run.perturbation;
      foms[i] = run_full_model(grid, ops, double_vortex_initial(grid, params, sc), params, config.dt, config.steps,
                               kahan_options(config));
    });
    return 0;
  });

  std::vector<SnapshotSet> train_sets;
  std::vector<std::size_t> train_index;
  for (std::size_t i = 0; i < report.runs.size(); ++i)
    if (report.runs[i].train) {
      train_sets.push_back(collect(foms[i].trajectory, foms[i].params, ops, config.stride));
      train_index.push_back(i);
    }
  const GlobalSnapshots global = concatenate(train_sets);
  std::vector<bool> is_train;
  for (const auto& run : report.runs) is_train.push_back(run.train);

  Table params_table({"set", "latitude", "coriolis", "perturbation"});
  for (const auto& run : report.runs)
    params_table.add({run.train ? "train" : "test", num(run.latitude), num(run.coriolis), num(run.perturbation)});
  params_table.write(config, "parameters");

  Table errors({"r", "model", "train_error", "test_error"});
  Table runs_table({"r", "model", "set", "latitude", "rel_error"});
  Table diag({"r", "equation", "tol", "rank", "condition_number", "residual"});
  Json rows_json = Json::array();
  for (int r : config.r_list) {
    ParametricRow row;
    row.r = r;
    const PodBasis basis = stage("pod", [&] { return pod_basis(global, r, pod_options(config)); });
    const ReducedModel galerkin =
        stage("galerkin", [&] { return assemble_galerkin(basis, config.params(), ops); });
    const OpInfRom opinf = stage("opinf", [&] {
      std::vector<ReducedData> data(train_index.size());
      parallel_for(train_index.size(), [&](std::size_t t) {
        data[t] = training_data(config, foms[train_index[t]], basis, ops);
      });
      return infer_operators(data, config.tolerances, infer_options(config));
    });
    row.diagnostics = diagnostics_of(opinf, basis.warnings);

    std::vector<RomResult> g_runs(foms.size()), o_runs(foms.size());
    stage("rom", [&] {
      parallel_for(foms.size(), [&](std::size_t i) {
        g_runs[i] = evaluate_rom("galerkin", galerkin, basis, foms[i], grid, false);
        o_runs[i] = evaluate_rom("opinf", opinf.model, basis, foms[i], grid, false);
      });
      return 0;
    });
    for (std::size_t i = 0; i < foms.size(); ++i) {
      row.galerkin_errors.push_back(g_runs[i].rel_error);
      row.opinf_errors.push_back(o_runs[i].rel_error);
      const std::string set = report.runs[i].train ? "train" : "test";
      runs_table.add({num(r), "galerkin", set, num(report.runs[i].latitude), num(g_runs[i].rel_error)});
      runs_table.add({num(r), "opinf", set, num(report.runs[i].latitude), num(o_runs[i].rel_error)});
    }
    row.galerkin = train_test_errors(row.galerkin_errors, is_train);
    row.opinf = train_test_errors(row.opinf_errors, is_train);
    auto opt = [](const std::optional<double>& v) { return v ? num(*v) : std::string(); };
    errors.add({num(r), "galerkin", opt(row.galerkin.train), opt(row.galerkin.test)});
    errors.add({num(r), "opinf", opt(row.opinf.train), opt(row.opinf.test)});
    for (int e = 0; e < 4; ++e)
      diag.add({num(r), kNames[e], num(config.tolerances[e]), num(static_cast<long long>(row.diagnostics.ranks[e])),
                num(row.diagnostics.condition_numbers[e]), num(row.diagnostics.residuals[e])});
    if (r == config.field_dump_r) {
      const std::size_t which = config.test_parameters > 0 ? train_index.size() : 0;
      dump_final_fields(config, "fields_final.bin", foms[which], basis,
                        {{"galerkin", &g_runs[which]}, {"opinf", &o_runs[which]}});
    }
    double g_seconds = 0.0, o_seconds = 0.0;
    for (std::size_t i = 0; i < foms.size(); ++i) {
      g_seconds += g_runs[i].seconds;
      o_seconds += o_runs[i].seconds;
    }
    rows_json.push_back(Json{{"r", r},
                             {"galerkin_seconds", g_seconds},
                             {"opinf_seconds", o_seconds},
                             {"opinf", diagnostics_json(row.diagnostics)}});
    report.rows.push_back(std::move(row));
  }
  errors.write(config, "parametric_errors");
  runs_table.write(config, "parametric_runs");
  diag.write(config, "opinf_diagnostics");
  double fom_seconds = 0.0;
  for (const auto& f : foms) fom_seconds += f.seconds;
  write_summary(config, Json{{"fom_seconds", fom_seconds}, {"rows", rows_json}});
  return report;
}

LcurveReport run_lcurve(const ExperimentConfig& config) {
  prepare_output(config);
  const Grid grid = config.make_grid();
  const DiffOperators ops = build_diff_2d(grid);
  const PhysicalParams params = config.params();
  const FomResult fom = stage("fom", [&] {
    return run_full_model(grid, ops, double_vortex_initial(grid, params, config.scenario()), params, config.dt,
                          config.steps, kahan_options(config));
  });
  const std::vector<SnapshotSet> sets{collect(fom.trajectory, params, ops, config.stride)};
  LcurveReport report;
  report.r = config.r_list.front();
  const PodBasis basis = stage("pod", [&] { return pod_basis(concatenate(sets), report.r, pod_options(config)); });
  std::vector<ReducedData> data{training_data(config, fom, basis, ops)};
  if (config.scale_coordinates) data = scale_data(data).data;
  const DataMatrices matrices = assemble_data_matrices(data);
  const std::vector<double> grid_tol =
      log_grid(config.lcurve_min_exponent, config.lcurve_max_exponent, config.lcurve_per_decade);
  stage("lcurve", [&] {
    parallel_for(4, [&](std::size_t e) {
      report.curves[e] = lcurve_scan(matrices.lhs[e], matrices.rhs[e], grid_tol, config.tol_scale);
      report.singular_values[e] = Eigen::BDCSVD<Eigen::MatrixXd>(matrices.lhs[e]).singularValues();
    });
    return 0;
  });

  Json suggested;
  for (int e = 0; e < 4; ++e) {
    Table t({"tol", "residual_norm", "solution_norm", "rank", "corner"});
    const Lcurve& lc = report.curves[e];
    for (std::size_t i = 0; i < lc.points.size(); ++i) {
      const auto& p = lc.points[i];
      t.add({num(p.tol), num(p.residual_norm), num(p.solution_norm), num(static_cast<long long>(p.rank)),
             lc.corner && *lc.corner == i ? "1" : "0"});
    }
    t.write(config, std::string("lcurve_") + kNames[e]);
    suggested[kNames[e]] = lc.suggested_tol ? Json(*lc.suggested_tol) : Json(nullptr);
  }
  Table sv({"index", "h", "u", "v", "s"});
  Eigen::Index longest = 0;
  for (const auto& s : report.singular_values) longest = std::max(longest, s.size());
  for (Eigen::Index i = 0; i < longest; ++i) {
    std::vector<std::string> cells{num(static_cast<long long>(i + 1))};
    for (const auto& s : report.singular_values) cells.push_back(i < s.size() ? num(s[i] / s[0]) : std::string());
    sv.add(std::move(cells));
  }
  sv.write(config, "data_singular_values");
  write_summary(config, Json{{"r", report.r}, {"suggested_tol", suggested}, {"warnings", matrices.warnings}});
  return report;
}

void run_experiment(const ExperimentConfig& config) {
  switch (config.command) {
    case Command::fom: run_fom(config); break;
    case Command::pod: run_pod(config); break;
    case Command::nonparametric: run_nonparametric(config); break;
    case Command::prediction: run_prediction(config); break;
    case Command::parametric: run_parametric(config); break;
    case Command::lcurve: run_lcurve(config); break;
  }
}

}  // namespace romswe
