#include "romswe/metrics.hpp"

#include <cmath>
#include <limits>

#include "romswe/error.hpp"

namespace romswe {

double rel_error_global(const Eigen::MatrixXd& reference, const Eigen::MatrixXd& approx) {
  if (reference.rows() != approx.rows() || reference.cols() != approx.cols())
    throw ShapeError("reference and approximation shapes differ");
  const double denom = reference.norm();
  if (denom == 0.0) throw InvalidArgument("relative error undefined: reference norm is zero");
  return (approx - reference).norm() / denom;
}

double rel_error_global(const Eigen::MatrixXd& reference, const Eigen::MatrixXd& reduced, const PodBasis& basis) {
  return rel_error_global(reference, lift_columns(basis, reduced));
}

Eigen::VectorXd rel_error_timestep(const Eigen::MatrixXd& reference, const Eigen::MatrixXd& approx,
                                   double cell_area) {
  if (reference.rows() != approx.rows() || reference.cols() != approx.cols())
    throw ShapeError("reference and approximation shapes differ");
  Eigen::VectorXd out(reference.cols());
  for (Eigen::Index k = 0; k < reference.cols(); ++k) {
    const double ref = std::sqrt(reference.col(k).squaredNorm() * cell_area);
    const double diff = std::sqrt((reference.col(k) - approx.col(k)).squaredNorm() * cell_area);
    out[k] = ref > 0.0 ? diff / ref : std::numeric_limits<double>::quiet_NaN();
  }
  return out;
}

AveragedError avg_rel_error(const Eigen::MatrixXd& reference, const Eigen::MatrixXd& approx, double cell_area,
                            Eigen::Index first, Eigen::Index last) {
  if (last < 0) last = reference.cols();
  if (first < 0 || first >= last || last > reference.cols()) throw InvalidArgument("empty or invalid column window");
  const Eigen::VectorXd per_step =
      rel_error_timestep(reference.middleCols(first, last - first), approx.middleCols(first, last - first), cell_area);
  AveragedError out;
  double sum = 0.0;
  for (Eigen::Index k = 0; k < per_step.size(); ++k) {
    if (std::isnan(per_step[k])) {
      ++out.skipped;
      out.warnings.push_back("column " + std::to_string(first + k) + " skipped: zero reference norm");
      continue;
    }
    sum += per_step[k];
    ++out.count;
  }
  out.value = out.count > 0 ? sum / static_cast<double>(out.count) : std::numeric_limits<double>::quiet_NaN();
  return out;
}

std::array<AveragedError, 4> avg_rel_error_state(const Eigen::MatrixXd& reference, const Eigen::MatrixXd& approx,
                                                 double cell_area, Eigen::Index first, Eigen::Index last) {
  if (reference.rows() % 4 != 0) throw ShapeError("stacked matrices need 4N rows");
  const Eigen::Index n = reference.rows() / 4;
  if (approx.rows() != reference.rows()) throw ShapeError("reference and approximation shapes differ");
  std::array<AveragedError, 4> out;
  for (int j = 0; j < 4; ++j)
    out[j] = avg_rel_error(reference.middleRows(j * n, n), approx.middleRows(j * n, n), cell_area, first, last);
  return out;
}

ConservedErrorSeries conserved_error_series(std::span<const ConservedQuantities> series) {
  if (series.size() < 2) throw InvalidArgument("need the initial value and at least one step");
  const ConservedQuantities& ref = series.front();
  const Eigen::Index k = static_cast<Eigen::Index>(series.size()) - 1;
  auto build = [&](double ConservedQuantities::*member, const char* name) {
    const double e0 = ref.*member;
    if (e0 == 0.0) throw InvalidArgument(std::string("relative error undefined: initial ") + name + " is zero");
    Eigen::VectorXd out(k);
    for (Eigen::Index i = 0; i < k; ++i) out[i] = std::abs(series[i + 1].*member - e0) / std::abs(e0);
    return out;
  };
  return {build(&ConservedQuantities::energy, "energy"), build(&ConservedQuantities::mass, "mass"),
          build(&ConservedQuantities::vorticity, "vorticity"), build(&ConservedQuantities::buoyancy, "buoyancy")};
}

ConservedQuantities conserved_rel_error(std::span<const ConservedQuantities> series) {
  const ConservedErrorSeries e = conserved_error_series(series);
  return {e.energy.mean(), e.mass.mean(), e.vorticity.mean(), e.buoyancy.mean()};
}

double drift_slope(const Eigen::VectorXd& series, double fraction) {
  if (!(fraction > 0.0 && fraction <= 1.0)) throw InvalidArgument("fraction must lie in (0, 1]");
  const Eigen::Index len = series.size();
  const Eigen::Index count = static_cast<Eigen::Index>(std::ceil(fraction * static_cast<double>(len)));
  if (count < 2) throw InvalidArgument("need at least two points to fit a slope");
  const Eigen::Index first = len - count;
  const Eigen::VectorXd t = Eigen::VectorXd::LinSpaced(count, static_cast<double>(first), static_cast<double>(len - 1));
  const Eigen::VectorXd y = series.tail(count);
  const double tm = t.mean(), ym = y.mean();
  return ((t.array() - tm) * (y.array() - ym)).sum() / (t.array() - tm).square().sum();
}

TrainTestErrors train_test_errors(std::span<const double> run_errors, const std::vector<bool>& is_train) {
  if (run_errors.empty()) throw InvalidArgument("no runs to average");
  if (run_errors.size() != is_train.size()) throw ShapeError("one split flag per run is required");
  double train = 0.0, test = 0.0;
  int ntrain = 0, ntest = 0;
  for (std::size_t i = 0; i < run_errors.size(); ++i) {
    if (is_train[i]) {
      train += run_errors[i];
      ++ntrain;
    } else {
      test += run_errors[i];
      ++ntest;
    }
  }
  TrainTestErrors out;
  if (ntrain > 0) out.train = train / ntrain;
  if (ntest > 0) out.test = test / ntest;
  return out;
}

}  // namespace romswe
