#include "romswe/lstsq.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/QR>
#include <Eigen/SVD>

#include "romswe/error.hpp"

namespace romswe {

LstsqResult min_norm_lstsq(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b, double tol, TolScale scale) {
  if (!(tol >= 0.0)) throw InvalidArgument("tolerance must be non-negative");
  if (a.rows() != b.rows()) throw ShapeError("least-squares operands need equal row counts");
  LstsqResult out;
  if (a.size() == 0 || a.cwiseAbs().maxCoeff() == 0.0) {
    out.solution = Eigen::MatrixXd::Zero(a.cols(), b.cols());
  } else {
    Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod;
    // The first pivot of a column-pivoted QR is the largest column norm.
    cod.setThreshold(scale == TolScale::absolute ? tol / a.colwise().norm().maxCoeff() : tol);
    cod.compute(a);
    out.rank = cod.rank();
    out.solution = out.rank == 0 ? Eigen::MatrixXd::Zero(a.cols(), b.cols()) : Eigen::MatrixXd(cod.solve(b));
  }
  out.residual_norm = (a * out.solution - b).norm();
  out.solution_norm = out.solution.norm();
  return out;
}

namespace {

double menger_curvature(const Eigen::Vector2d& p, const Eigen::Vector2d& q, const Eigen::Vector2d& r) {
  const double cross = (q - p).x() * (r - p).y() - (q - p).y() * (r - p).x();
  const double denom = (q - p).norm() * (r - q).norm() * (r - p).norm();
  return denom > 0.0 ? 2.0 * std::abs(cross) / denom : 0.0;
}

}  // namespace

Lcurve lcurve_scan(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b, std::span<const double> tol_grid,
                   TolScale scale) {
  if (!std::is_sorted(tol_grid.begin(), tol_grid.end()))
    throw InvalidArgument("tolerance grid must be sorted ascending");
  Lcurve out;
  for (double tol : tol_grid) {
    const LstsqResult res = min_norm_lstsq(a, b, tol, scale);
    out.points.push_back({tol, res.residual_norm, res.solution_norm, res.rank});
  }

  // Groups of consecutive tolerances that retain the same rank give the same
  // solution and collapse to one polyline vertex.
  std::vector<std::pair<std::size_t, std::size_t>> groups;
  for (std::size_t i = 0; i < out.points.size(); ++i) {
    if (!groups.empty() && out.points[i].rank == out.points[groups.back().first].rank)
      groups.back().second = i;
    else
      groups.emplace_back(i, i);
  }
  if (groups.size() < 3) return out;

  const double floor = std::numeric_limits<double>::min();
  auto vertex = [&](std::size_t g) {
    const LcurvePoint& p = out.points[groups[g].first];
    return Eigen::Vector2d(std::log10(std::max(p.residual_norm, floor)),
                           std::log10(std::max(p.solution_norm, floor)));
  };
  double best = -1.0;
  std::size_t best_group = 0;
  for (std::size_t g = 1; g + 1 < groups.size(); ++g) {
    const double k = menger_curvature(vertex(g - 1), vertex(g), vertex(g + 1));
    if (k > best) {
      best = k;
      best_group = g;
    }
  }
  const auto [lo, hi] = groups[best_group];
  out.corner = lo + (hi - lo) / 2;
  out.suggested_tol = out.points[*out.corner].tol;
  return out;
}

std::vector<double> log_grid(double lo_exponent, double hi_exponent, int per_decade) {
  if (per_decade < 1 || hi_exponent < lo_exponent) throw InvalidArgument("invalid logarithmic grid");
  std::vector<double> grid;
  const int count = static_cast<int>(std::lround((hi_exponent - lo_exponent) * per_decade));
  for (int i = 0; i <= count; ++i) grid.push_back(std::pow(10.0, lo_exponent + static_cast<double>(i) / per_decade));
  return grid;
}

double condition_number(const Eigen::MatrixXd& a) {
  if (a.size() == 0) return 0.0;
  const Eigen::VectorXd sigma = Eigen::BDCSVD<Eigen::MatrixXd>(a).singularValues();
  const double smin = sigma[sigma.size() - 1];
  return smin > 0.0 ? sigma[0] / smin : std::numeric_limits<double>::infinity();
}

}  // namespace romswe
