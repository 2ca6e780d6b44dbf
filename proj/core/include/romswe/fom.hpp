#pragma once

#include <array>
#include <memory>
#include <optional>
#include <string_view>
#include <vector>

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include "romswe/grid.hpp"

namespace romswe {

/// The four prognostic fields, in stacking order.
enum class Field : int { h = 0, u = 1, v = 2, s = 3 };
inline constexpr std::array<Field, 4> kFields{Field::h, Field::u, Field::v, Field::s};
inline constexpr int index_of(Field f) { return static_cast<int>(f); }
std::string_view field_name(Field f);

/// Stacked semi-discrete state w = (h, u, v, s), each block of length N.
class State {
public:
  State() = default;
  explicit State(Eigen::Index nodes) : w_(Eigen::VectorXd::Zero(4 * nodes)), nodes_(nodes) {}
  /// Takes a stacked 4N vector; throws ShapeError if the length is not a multiple of 4.
  explicit State(Eigen::VectorXd stacked);
  static State from_fields(const Eigen::VectorXd& h, const Eigen::VectorXd& u,
                           const Eigen::VectorXd& v, const Eigen::VectorXd& s);

  Eigen::Index nodes() const { return nodes_; }
  const Eigen::VectorXd& stacked() const { return w_; }
  Eigen::VectorXd& stacked() { return w_; }

  auto field(Field f) { return w_.segment(index_of(f) * nodes_, nodes_); }
  auto field(Field f) const { return w_.segment(index_of(f) * nodes_, nodes_); }
  auto h() { return field(Field::h); }
  auto u() { return field(Field::u); }
  auto v() { return field(Field::v); }
  auto s() { return field(Field::s); }
  auto h() const { return field(Field::h); }
  auto u() const { return field(Field::u); }
  auto v() const { return field(Field::v); }
  auto s() const { return field(Field::s); }

private:
  Eigen::VectorXd w_;
  Eigen::Index nodes_ = 0;
};

inline constexpr double kEarthRotationRate = 7.292e-5;  // rad/s
inline constexpr double kDefaultGravity = 9.80616;      // m/s^2

/// f(mu) = 2 Omega sin(mu).
double coriolis_from_latitude(double mu);

struct PhysicalParams {
  double f = 6.147e-5;
  double g = kDefaultGravity;
  /// Latitude the Coriolis value was derived from, when it was.
  std::optional<double> latitude;
  /// Bottom topography; empty means b = 0.
  Eigen::VectorXd topography;

  static PhysicalParams with_coriolis(double f, double g = kDefaultGravity);
  static PhysicalParams at_latitude(double mu, double g = kDefaultGravity);
  bool has_topography() const { return topography.size() > 0; }
};

/// Discrete energy, mass, total potential vorticity and buoyancy.
struct ConservedQuantities {
  double energy = 0.0;
  double mass = 0.0;
  double vorticity = 0.0;
  double buoyancy = 0.0;
};

/// Right-hand side F(w) of the semi-discrete system.
State rhs(const State& w, const PhysicalParams& params, const DiffOperators& ops);

/// Exact Jacobian F'(w) as a sparse 4N x 4N matrix.
SparseMatrix jacobian(const State& w, const PhysicalParams& params, const DiffOperators& ops);

enum class LinearSolver { automatic, sparse_lu, bicgstab };

struct KahanOptions {
  /// `automatic` uses sparse LU up to `direct_size_limit` unknowns and
  /// diagonally preconditioned BiCGSTAB above it.
  LinearSolver solver = LinearSolver::automatic;
  Eigen::Index direct_size_limit = 20000;
  /// Relative residual target of the iterative solver (must be <= 1e-10).
  double iterative_tolerance = 1e-13;
  int max_iterations = 500;
};

/// Linearly implicit Kahan integrator for the full-order model.
///
/// Each step solves (I - dt/2 F'(w)) delta = dt F(w) and returns w + delta. The
/// sparsity pattern of the system matrix does not depend on the state, so the
/// symbolic factorization is computed once and reused.
class KahanStepper {
public:
  KahanStepper(PhysicalParams params, const DiffOperators& ops, KahanOptions options = {});
  ~KahanStepper();
  KahanStepper(KahanStepper&&) noexcept;
  KahanStepper& operator=(KahanStepper&&) noexcept;

  State step(const State& w, double dt);

  const PhysicalParams& params() const { return params_; }

private:
  struct Impl;
  PhysicalParams params_;
  const DiffOperators* ops_;
  KahanOptions options_;
  std::unique_ptr<Impl> impl_;
};

/// One Kahan step with a freshly built stepper.
State kahan_step(const State& w, double dt, const PhysicalParams& params, const DiffOperators& ops);

/// States at t_0 ... t_K stored column-wise (4N x (K+1)).
struct Trajectory {
  Eigen::MatrixXd states;
  double dt = 0.0;

  Eigen::Index steps() const { return states.cols() - 1; }
  Eigen::Index nodes() const { return states.rows() / 4; }
  double time(Eigen::Index k) const { return static_cast<double>(k) * dt; }
  State state(Eigen::Index k) const { return State(Eigen::VectorXd(states.col(k))); }
};

/// Integrates K Kahan steps. A SolveError from step k is rethrown with that step index.
Trajectory simulate(const State& initial, double dt, int steps, const PhysicalParams& params,
                    const DiffOperators& ops, const KahanOptions& options = {});

ConservedQuantities conserved_quantities(const State& w, const PhysicalParams& params,
                                         const Grid& grid);

/// Conserved quantities of every stored state of a trajectory.
std::vector<ConservedQuantities> invariant_series(const Trajectory& trajectory,
                                                  const PhysicalParams& params, const Grid& grid);

/// Double-vortex test case on a doubly periodic [0, L]^2 domain.
struct DoubleVortexScenario {
  double length = 5.0e6;  // m
  double mean_height = 750.0;
  double height_amplitude = 75.0;
  double sigma_x = 3.0 * 5.0e6 / 40.0;
  double sigma_y = 3.0 * 5.0e6 / 40.0;
  double offset_x = 0.1;
  double offset_y = 0.1;

  /// Defaults with sigma_x = sigma_y = 3L/40 for the given length.
  static DoubleVortexScenario with_length(double length);
};

State double_vortex_initial(const Grid& grid, const PhysicalParams& params,
                            const DoubleVortexScenario& scenario);

}  // namespace romswe
