#pragma once

#include <array>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "romswe/fom.hpp"
#include "romswe/pod.hpp"

namespace romswe {

/// ||W_approx - W||_F / ||W||_F. Throws InvalidArgument when ||W||_F = 0.
double rel_error_global(const Eigen::MatrixXd& reference, const Eigen::MatrixXd& approx);
/// Same with the approximation given in reduced coordinates and lifted by `basis`.
double rel_error_global(const Eigen::MatrixXd& reference, const Eigen::MatrixXd& reduced, const PodBasis& basis);

/// Per-column ||w^k - w_r^k||_L2 / ||w^k||_L2 with ||w||_L2^2 = sum w^2 dx dy.
/// Columns whose reference norm is zero give NaN.
Eigen::VectorXd rel_error_timestep(const Eigen::MatrixXd& reference, const Eigen::MatrixXd& approx,
                                   double cell_area);

struct AveragedError {
  double value = 0.0;
  /// Number of summed columns.
  Eigen::Index count = 0;
  /// Columns skipped because the reference norm was zero.
  Eigen::Index skipped = 0;
  std::vector<std::string> warnings;
};

/// Mean of rel_error_timestep over columns [first, last) (last = -1: all).
AveragedError avg_rel_error(const Eigen::MatrixXd& reference, const Eigen::MatrixXd& approx, double cell_area,
                            Eigen::Index first = 0, Eigen::Index last = -1);

/// avg_rel_error applied to each field block of stacked 4N x K matrices.
std::array<AveragedError, 4> avg_rel_error_state(const Eigen::MatrixXd& reference, const Eigen::MatrixXd& approx,
                                                 double cell_area, Eigen::Index first = 0, Eigen::Index last = -1);

/// |E^k - E^0| / |E^0| for k = 1 ... K, per quantity. Throws InvalidArgument
/// when a reference value is zero.
struct ConservedErrorSeries {
  Eigen::VectorXd energy, mass, vorticity, buoyancy;
};
ConservedErrorSeries conserved_error_series(std::span<const ConservedQuantities> series);

/// Time averages (1/K) sum_k of conserved_error_series.
ConservedQuantities conserved_rel_error(std::span<const ConservedQuantities> series);

/// Least-squares slope per index of the trailing `fraction` of a series.
double drift_slope(const Eigen::VectorXd& series, double fraction = 0.8);

struct TrainTestErrors {
  std::optional<double> train;
  std::optional<double> test;
};

/// Averages per-run global relative errors over the runs flagged as training
/// and over the rest. Throws InvalidArgument when there are no runs.
TrainTestErrors train_test_errors(std::span<const double> run_errors, const std::vector<bool>& is_train);

}  // namespace romswe
