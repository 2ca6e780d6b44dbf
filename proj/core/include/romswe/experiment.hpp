#pragma once

#include <array>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "romswe/config.hpp"
#include "romswe/fom.hpp"
#include "romswe/lstsq.hpp"
#include "romswe/metrics.hpp"
#include "romswe/opinf.hpp"
#include "romswe/pod.hpp"
#include "romswe/reduced_model.hpp"
#include "romswe/snapshots.hpp"

namespace romswe {

struct ConservationSummary {
  /// Time-averaged relative errors.
  ConservedQuantities mean_error;
  /// Least-squares slope per step of each error series over its last 80%.
  ConservedQuantities slope;
  ConservedErrorSeries series;
};

ConservationSummary summarize_conservation(std::span<const ConservedQuantities> values);

struct FomResult {
  Trajectory trajectory;
  PhysicalParams params;
  std::vector<ConservedQuantities> invariants;
  ConservationSummary conservation;
  double seconds = 0.0;
};

FomResult run_full_model(const Grid& grid, const DiffOperators& ops, const State& initial,
                         const PhysicalParams& params, double dt, int steps, const KahanOptions& options = {});

struct RomResult {
  std::string model;
  int r = 0;
  ReducedTrajectory trajectory;
  double seconds = 0.0;
  /// Global relative error over steps 1 ... K.
  double rel_error = 0.0;
  /// Time-averaged L2 relative error of the stacked state over steps 1 ... K.
  double avg_error = 0.0;
  std::array<double, 4> state_errors{};
  /// Filled only when conserved quantities were requested.
  std::optional<ConservationSummary> conservation;
  /// Non-empty when the reduced integration failed; the errors are then infinite.
  std::string failure;
};

/// Integrates `model` from the projected initial state and compares the lifted
/// trajectory with the full-order one.
RomResult evaluate_rom(const std::string& name, const ReducedModel& model, const PodBasis& basis,
                       const FomResult& fom, const Grid& grid, bool with_conservation);

/// Reduced training data of one trajectory according to the configured
/// re-projection mode and snapshot stride.
ReducedData training_data(const ExperimentConfig& config, const FomResult& fom, const PodBasis& basis,
                          const DiffOperators& ops, int last_step = -1);

struct FomReport {
  FomResult fom;
};

struct PodReport {
  PodBasis basis;
  /// (r, ||W - Phi Phi^T W||_F / ||W||_F) over the stacked state.
  std::vector<std::pair<int, double>> projection_errors;
};

struct OpInfDiagnostics {
  std::array<Eigen::Index, 4> ranks{};
  std::array<double, 4> condition_numbers{};
  std::array<double, 4> residuals{};
  std::vector<std::string> warnings;
};

struct NonparametricRow {
  int r = 0;
  RomResult galerkin;
  RomResult opinf;
  OpInfDiagnostics diagnostics;
};

struct NonparametricReport {
  FomResult fom;
  std::vector<NonparametricRow> rows;
};

struct PredictionCell {
  int train_steps = 0;
  int r = 0;
  std::string model;
  double train_error = 0.0;
  double prediction_error = 0.0;
  Eigen::VectorXd step_errors;
};

struct PredictionReport {
  FomResult fom;
  std::vector<PredictionCell> cells;
};

struct ParametricRun {
  bool train = true;
  double latitude = 0.0;
  double coriolis = 0.0;
  double perturbation = 0.0;
};

struct ParametricRow {
  int r = 0;
  TrainTestErrors galerkin;
  TrainTestErrors opinf;
  std::vector<double> galerkin_errors;
  std::vector<double> opinf_errors;
  OpInfDiagnostics diagnostics;
};

struct ParametricReport {
  std::vector<ParametricRun> runs;
  std::vector<ParametricRow> rows;
};

struct LcurveReport {
  int r = 0;
  std::array<Lcurve, 4> curves;
  std::array<Eigen::VectorXd, 4> singular_values;
};

/// Each command writes its files into config.out_dir when that is non-empty.
FomReport run_fom(const ExperimentConfig& config);
PodReport run_pod(const ExperimentConfig& config);
NonparametricReport run_nonparametric(const ExperimentConfig& config);
PredictionReport run_prediction(const ExperimentConfig& config);
ParametricReport run_parametric(const ExperimentConfig& config);
LcurveReport run_lcurve(const ExperimentConfig& config);

/// Dispatches on config.command.
void run_experiment(const ExperimentConfig& config);

}  // namespace romswe
