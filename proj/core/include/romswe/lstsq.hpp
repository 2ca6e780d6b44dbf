#pragma once

#include <optional>
#include <span>
#include <vector>

#include <Eigen/Core>

namespace romswe {

struct LstsqResult {
  Eigen::MatrixXd solution;
  Eigen::Index rank = 0;
  double residual_norm = 0.0;
  double solution_norm = 0.0;
};

/// How a drop tolerance is compared with the pivots |R_ii|.
enum class TolScale {
  /// |R_ii| <= tol * |R_00|
  relative,
  /// |R_ii| <= tol
  absolute,
};

/// Minimum-Frobenius-norm minimizer of ||A X - B||_F.
///
/// The numerical rank comes from a column-pivoted QR whose pivots at or below
/// the drop tolerance are discarded. The remaining rows are reduced with a
/// complete orthogonal decomposition, so the result is the pseudo-inverse
/// solution of the rank-truncated problem. Rank 0 gives X = 0.
LstsqResult min_norm_lstsq(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b, double tol,
                           TolScale scale = TolScale::relative);

struct LcurvePoint {
  double tol = 0.0;
  double residual_norm = 0.0;
  double solution_norm = 0.0;
  Eigen::Index rank = 0;
};

struct Lcurve {
  std::vector<LcurvePoint> points;
  /// Index into `points` of the suggested corner; empty for fewer than three
  /// distinct points.
  std::optional<std::size_t> corner;
  std::optional<double> suggested_tol;
};

/// One solve per tolerance (ascending). The corner is the point of maximum
/// discrete curvature on the log-log (residual, solution norm) polyline after
/// merging neighbouring tolerances that give the same solution; the suggested
/// tolerance is the middle member of the corner's group.
Lcurve lcurve_scan(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b, std::span<const double> tol_grid,
                   TolScale scale = TolScale::relative);

/// Logarithmically spaced grid 10^lo ... 10^hi with `per_decade` points per decade.
std::vector<double> log_grid(double lo_exponent, double hi_exponent, int per_decade = 1);

/// Largest over smallest singular value (infinite when the smallest is zero).
double condition_number(const Eigen::MatrixXd& a);

}  // namespace romswe
