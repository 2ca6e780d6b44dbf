#pragma once

#include <array>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "romswe/fom.hpp"
#include "romswe/lstsq.hpp"
#include "romswe/pod.hpp"
#include "romswe/reduced_model.hpp"
#include "romswe/snapshots.hpp"

namespace romswe {

/// Reduced states and reduced time derivatives of one trajectory, r x K per field.
struct ReducedData {
  std::array<Eigen::MatrixXd, 4> states;
  std::array<Eigen::MatrixXd, 4> derivatives;
  double coriolis = 0.0;

  Eigen::Index columns() const { return states[0].cols(); }
};

/// Open-loop re-projection: every stored state w is replaced by its
/// projection P w = Phi Phi^T w, and the derivative is Phi^T F(P w).
ReducedData reproject(const SnapshotSet& snapshots, const PodBasis& basis, const PhysicalParams& params,
                      const DiffOperators& ops);

/// Closed-loop re-projection: starting from Phi^T w0, each step advances the
/// full model by one Kahan step from the lifted reduced state and projects the
/// result. Columns are taken every `stride` steps starting at step 1.
ReducedData reproject_closed_loop(const State& initial, const PodBasis& basis, const PhysicalParams& params,
                                  const DiffOperators& ops, double dt, int steps, int stride = 1,
                                  const KahanOptions& options = {});

/// Plain projection of stored states and stored full-order derivatives.
ReducedData project_snapshots(const SnapshotSet& snapshots, const PodBasis& basis);

/// Column k of the result is kron(a.col(k), b.col(k)).
Eigen::MatrixXd khatri_rao(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b);

/// Regression problems for the four equations, parameter blocks stacked by rows.
///
///   h: [h*u, h*v]
///   u: [u*u, v*u, h*s, f v]
///   v: [u*v, v*v, h*s, f u]
///   s: [u*s, v*s]
///
/// where a*b are the transposed Khatri-Rao products of reduced states.
struct DataMatrices {
  std::array<Eigen::MatrixXd, 4> lhs;
  std::array<Eigen::MatrixXd, 4> rhs;
  std::vector<std::string> warnings;
  int r = 0;
};

/// Warns when the stacked row count is smaller than an equation's unknown count.
DataMatrices assemble_data_matrices(std::span<const ReducedData> data);

struct OpInfRom {
  ReducedModel model;
  std::array<double, 4> tolerances{};
  std::array<Eigen::Index, 4> ranks{};
  std::array<double, 4> residuals{};
  std::array<double, 4> condition_numbers{};
  std::vector<std::string> warnings;
};

struct InferOptions {
  /// Divide every reduced coordinate and the Coriolis value by their
  /// root-mean-squares over the data before regression and map the learned
  /// operators back afterwards.
  bool scale_coordinates = false;
  TolScale tol_scale = TolScale::relative;
  /// Condition numbers cost one SVD per data matrix.
  bool compute_condition_numbers = true;
};

/// Root-mean-square of every reduced coordinate over all data (4r entries);
/// coordinates that are identically zero get scale 1.
Eigen::VectorXd coordinate_scales(std::span<const ReducedData> data);

struct ScaledData {
  std::vector<ReducedData> data;
  Eigen::VectorXd scales;
  double coriolis_scale = 1.0;
};

/// Divides states and derivatives by coordinate_scales and the Coriolis values
/// by their root-mean-square over all columns.
ScaledData scale_data(std::span<const ReducedData> data);

/// Rescales a model learned in coordinates z / scales and Coriolis value
/// f / coriolis_scale back to z and f.
ReducedModel unscale_model(const ReducedModel& scaled, const Eigen::VectorXd& scales, double coriolis_scale = 1.0);

/// Four independent minimum-norm regressions, one per equation. The overload
/// taking assembled matrices never rescales.
OpInfRom infer_operators(const DataMatrices& matrices, const std::array<double, 4>& tolerances,
                         const InferOptions& options = {});
OpInfRom infer_operators(std::span<const ReducedData> data, const std::array<double, 4>& tolerances,
                         const InferOptions& options = {});

/// Splits a learned coefficient block per equation back into model terms.
ReducedModel model_from_coefficients(int r, const std::array<Eigen::MatrixXd, 4>& coefficients);

}  // namespace romswe
