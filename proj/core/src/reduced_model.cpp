#include "romswe/reduced_model.hpp"

#include <cmath>
#include <limits>
#include <sstream>
#include <string>

#include <Eigen/LU>

#include "romswe/error.hpp"
#include "romswe/matrix_io.hpp"

namespace romswe {

namespace {

Field parse_field(const std::string& name) {
  for (Field f : kFields)
    if (field_name(f) == name) return f;
  throw LoadError(LoadErrorKind::corrupt_header, "unknown field '" + name + "'");
}

}  // namespace

void ReducedModel::add(QuadraticTerm term) {
  if (term.matrix.rows() != r_ || term.matrix.cols() != static_cast<Eigen::Index>(r_) * r_)
    throw ShapeError("quadratic term " + term.name + " must be r x r^2");
  quadratic_.push_back(std::move(term));
}

void ReducedModel::add(LinearTerm term) {
  if (term.matrix.rows() != r_ || term.matrix.cols() != r_)
    throw ShapeError("linear term " + term.name + " must be r x r");
  linear_.push_back(std::move(term));
}

const QuadraticTerm* ReducedModel::find_quadratic(const std::string& name) const {
  for (const auto& t : quadratic_)
    if (t.name == name) return &t;
  return nullptr;
}

const LinearTerm* ReducedModel::find_linear(const std::string& name) const {
  for (const auto& t : linear_)
    if (t.name == name) return &t;
  return nullptr;
}

Eigen::VectorXd ReducedModel::linear_rhs(const Eigen::VectorXd& z, double coriolis) const {
  if (z.size() != size()) throw ShapeError("reduced state must have 4r entries");
  Eigen::VectorXd out = Eigen::VectorXd::Zero(size());
  for (const auto& t : linear_) {
    const double scale = t.coriolis ? coriolis : 1.0;
    out.segment(index_of(t.eq) * r_, r_).noalias() += scale * t.matrix * z.segment(index_of(t.source) * r_, r_);
  }
  return out;
}

// H (a ⊗ b) = sum_i a_i H_i b where H_i is the i-th r x r column slab of H.
Eigen::VectorXd ReducedModel::quadratic_rhs(const Eigen::VectorXd& z) const {
  if (z.size() != size()) throw ShapeError("reduced state must have 4r entries");
  Eigen::VectorXd out = Eigen::VectorXd::Zero(size());
  for (const auto& t : quadratic_) {
    const auto a = z.segment(index_of(t.left) * r_, r_);
    const auto b = z.segment(index_of(t.right) * r_, r_);
    auto dst = out.segment(index_of(t.eq) * r_, r_);
    for (int i = 0; i < r_; ++i)
      if (a[i] != 0.0) dst.noalias() += a[i] * (t.matrix.middleCols(i * r_, r_) * b);
  }
  return out;
}

Eigen::VectorXd ReducedModel::rhs(const Eigen::VectorXd& z, double coriolis) const {
  return linear_rhs(z, coriolis) + quadratic_rhs(z);
}

Eigen::MatrixXd ReducedModel::linear_operator(double coriolis) const {
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(size(), size());
  for (const auto& t : linear_)
    a.block(index_of(t.eq) * r_, index_of(t.source) * r_, r_, r_) += (t.coriolis ? coriolis : 1.0) * t.matrix;
  return a;
}

Eigen::MatrixXd ReducedModel::jacobian(const Eigen::VectorXd& z, double coriolis) const {
  if (z.size() != size()) throw ShapeError("reduced state must have 4r entries");
  Eigen::MatrixXd jac = linear_operator(coriolis);
  for (const auto& t : quadratic_) {
    const auto a = z.segment(index_of(t.left) * r_, r_);
    const auto b = z.segment(index_of(t.right) * r_, r_);
    auto d_left = jac.block(index_of(t.eq) * r_, index_of(t.left) * r_, r_, r_);
    for (int i = 0; i < r_; ++i) d_left.col(i).noalias() += t.matrix.middleCols(i * r_, r_) * b;
    auto d_right = jac.block(index_of(t.eq) * r_, index_of(t.right) * r_, r_, r_);
    for (int i = 0; i < r_; ++i)
      if (a[i] != 0.0) d_right.noalias() += a[i] * t.matrix.middleCols(i * r_, r_);
  }
  return jac;
}

Eigen::VectorXd reduced_kahan_step(const ReducedModel& model, const Eigen::VectorXd& z, double dt,
                                   double coriolis) {
  if (!(dt > 0.0)) throw InvalidArgument("time step must be positive");
  const Eigen::Index n = model.size();
  const Eigen::MatrixXd system = Eigen::MatrixXd::Identity(n, n) - 0.5 * dt * model.jacobian(z, coriolis);
  const Eigen::PartialPivLU<Eigen::MatrixXd> lu(system);
  const double rcond = lu.rcond();
  if (!(rcond > std::numeric_limits<double>::epsilon()))
    throw SolveError("reduced Kahan system is numerically singular", -1, rcond);
  const Eigen::VectorXd delta = lu.solve(dt * model.rhs(z, coriolis));
  if (!delta.allFinite()) throw SolveError("reduced Kahan update is not finite", -1, rcond);
  return z + delta;
}

ReducedTrajectory simulate_reduced(const ReducedModel& model, const Eigen::VectorXd& initial,
                                   double dt, int steps, double coriolis) {
  if (steps < 1) throw InvalidArgument("need at least one time step");
  if (initial.size() != model.size()) throw ShapeError("initial reduced state must have 4r entries");
  ReducedTrajectory traj;
  traj.dt = dt;
  traj.states.resize(model.size(), steps + 1);
  traj.states.col(0) = initial;
  for (int k = 0; k < steps; ++k) {
    try {
      traj.states.col(k + 1) = reduced_kahan_step(model, traj.states.col(k), dt, coriolis);
    } catch (const SolveError& e) {
      throw SolveError(std::string(e.what()) + " at step " + std::to_string(k), k, e.rcond());
    }
  }
  return traj;
}

void save_model(const ReducedModel& model, const std::filesystem::path& path, const std::string& kind) {
  MatrixBundle b;
  b.set("kind", kind);
  b.set("r", static_cast<long long>(model.dim()));
  b.set("quadratic_terms", static_cast<long long>(model.quadratic_terms().size()));
  b.set("linear_terms", static_cast<long long>(model.linear_terms().size()));
  int idx = 0;
  for (const auto& t : model.quadratic_terms()) {
    b.set("q" + std::to_string(idx++), t.name + " " + std::string(field_name(t.eq)) + " " +
                                           std::string(field_name(t.left)) + " " +
                                           std::string(field_name(t.right)));
    b.add("Q_" + t.name, t.matrix);
  }
  idx = 0;
  for (const auto& t : model.linear_terms()) {
    b.set("l" + std::to_string(idx++), t.name + " " + std::string(field_name(t.eq)) + " " +
                                           std::string(field_name(t.source)) + " " +
                                           (t.coriolis ? "coriolis" : "constant"));
    b.add("L_" + t.name, t.matrix);
  }
  save_bundle(b, path);
}

ReducedModel load_model(const std::filesystem::path& path) {
  const MatrixBundle b = load_bundle(path);
  ReducedModel model(static_cast<int>(b.get_int("r")));
  const long long nq = b.get_int("quadratic_terms"), nl = b.get_int("linear_terms");
  try {
    for (long long i = 0; i < nq; ++i) {
      std::istringstream in(b.get("q" + std::to_string(i)));
      std::string name, eq, left, right;
      if (!(in >> name >> eq >> left >> right))
        throw LoadError(LoadErrorKind::corrupt_header, "malformed quadratic term entry");
      model.add(QuadraticTerm{name, parse_field(eq), parse_field(left), parse_field(right), b.matrix("Q_" + name)});
    }
    for (long long i = 0; i < nl; ++i) {
      std::istringstream in(b.get("l" + std::to_string(i)));
      std::string name, eq, src, kind;
      if (!(in >> name >> eq >> src >> kind))
        throw LoadError(LoadErrorKind::corrupt_header, "malformed linear term entry");
      model.add(LinearTerm{name, parse_field(eq), parse_field(src), b.matrix("L_" + name), kind == "coriolis"});
    }
  } catch (const ShapeError& e) {
    throw LoadError(LoadErrorKind::dimension_mismatch, e.what());
  }
  return model;
}

}  // namespace romswe
