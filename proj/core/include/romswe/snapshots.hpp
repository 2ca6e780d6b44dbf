#pragma once

#include <array>
#include <filesystem>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "romswe/fom.hpp"

namespace romswe {

/// Per-field trajectory matrices W_j and their time derivatives, N x K each.
///
/// Column k holds the state after step 1 + k*stride; the initial condition
/// w^0 is kept separately in `initial`.
struct SnapshotSet {
  std::array<Eigen::MatrixXd, 4> states;
  std::array<Eigen::MatrixXd, 4> derivatives;
  Eigen::VectorXd initial;
  double coriolis = 0.0;
  std::optional<double> latitude;
  double dt = 0.0;
  int stride = 1;

  Eigen::Index nodes() const { return states[0].rows(); }
  Eigen::Index columns() const { return states[0].cols(); }
  const Eigen::MatrixXd& state_matrix(Field f) const { return states[index_of(f)]; }
  const Eigen::MatrixXd& derivative_matrix(Field f) const { return derivatives[index_of(f)]; }
  State state(Eigen::Index k) const;
  State derivative(Eigen::Index k) const;
  /// All four fields stacked, 4N x K.
  Eigen::MatrixXd stacked_states() const;
};

/// Keeps trajectory steps 1, 1+stride, ... up to `last_step` (default: K) and
/// evaluates the right-hand side at each kept state.
SnapshotSet collect(const Trajectory& trajectory, const PhysicalParams& params,
                    const DiffOperators& ops, int stride = 1, Eigen::Index last_step = -1);

/// Column-wise concatenation over parameters, in input order.
struct GlobalSnapshots {
  std::array<Eigen::MatrixXd, 4> states;
  std::vector<double> coriolis;
  std::vector<Eigen::Index> widths;

  Eigen::Index nodes() const { return states[0].rows(); }
  Eigen::Index columns() const { return states[0].cols(); }
  const Eigen::MatrixXd& state_matrix(Field f) const { return states[index_of(f)]; }
};

GlobalSnapshots concatenate(std::span<const SnapshotSet> sets);

void save_snapshots(const SnapshotSet& set, const std::filesystem::path& path);
SnapshotSet load_snapshots(const std::filesystem::path& path);

}  // namespace romswe
