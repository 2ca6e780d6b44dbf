#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "romswe/fom.hpp"

namespace romswe {

/// H (left ⊗ right) added to equation `eq`. H is r x r^2; the Kronecker index
/// of (a ⊗ b) is i*r + j with a_i the slow factor.
struct QuadraticTerm {
  std::string name;
  Field eq;
  Field left;
  Field right;
  Eigen::MatrixXd matrix;
};

/// L z_src added to equation `eq`, multiplied by the Coriolis value when
/// `coriolis` is set.
struct LinearTerm {
  std::string name;
  Field eq;
  Field source;
  Eigen::MatrixXd matrix;
  bool coriolis = false;
};

/// Linear-quadratic reduced system in the 4r coordinates (h~, u~, v~, s~).
/// The Coriolis value is the only parameter and enters affinely.
class ReducedModel {
public:
  ReducedModel() = default;
  explicit ReducedModel(int r) : r_(r) {}

  int dim() const { return r_; }
  Eigen::Index size() const { return 4 * static_cast<Eigen::Index>(r_); }

  /// Throws ShapeError unless the matrix is r x r^2.
  void add(QuadraticTerm term);
  /// Throws ShapeError unless the matrix is r x r.
  void add(LinearTerm term);

  const std::vector<QuadraticTerm>& quadratic_terms() const { return quadratic_; }
  const std::vector<LinearTerm>& linear_terms() const { return linear_; }
  const QuadraticTerm* find_quadratic(const std::string& name) const;
  const LinearTerm* find_linear(const std::string& name) const;

  Eigen::VectorXd rhs(const Eigen::VectorXd& z, double coriolis) const;
  /// Linear part only, f-scaled.
  Eigen::VectorXd linear_rhs(const Eigen::VectorXd& z, double coriolis) const;
  Eigen::VectorXd quadratic_rhs(const Eigen::VectorXd& z) const;
  Eigen::MatrixXd jacobian(const Eigen::VectorXd& z, double coriolis) const;
  /// The f-scaled linear operator, which equals jacobian(0, f).
  Eigen::MatrixXd linear_operator(double coriolis) const;

private:
  int r_ = 0;
  std::vector<QuadraticTerm> quadratic_;
  std::vector<LinearTerm> linear_;
};

/// Reduced states at t_0 ... t_K stored column-wise (4r x (K+1)).
struct ReducedTrajectory {
  Eigen::MatrixXd states;
  double dt = 0.0;

  Eigen::Index steps() const { return states.cols() - 1; }
};

/// One Kahan step (I - dt/2 J(z)) delta = dt F(z) with a dense LU solve.
/// Throws SolveError carrying the reciprocal condition estimate when the
/// system is numerically singular or the update is not finite.
Eigen::VectorXd reduced_kahan_step(const ReducedModel& model, const Eigen::VectorXd& z, double dt,
                                   double coriolis);

ReducedTrajectory simulate_reduced(const ReducedModel& model, const Eigen::VectorXd& initial,
                                   double dt, int steps, double coriolis);

void save_model(const ReducedModel& model, const std::filesystem::path& path,
                const std::string& kind = "reduced-model");
ReducedModel load_model(const std::filesystem::path& path);

}  // namespace romswe
