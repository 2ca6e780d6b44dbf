#include <cmath>
#include <numbers>

#include <doctest.h>

#include <Eigen/LU>

#include "helpers.hpp"
#include "romswe/error.hpp"
#include "romswe/fom.hpp"

using namespace romswe;

namespace {

// Loop-based stencil evaluation of the semi-discrete equations, written
// directly from the node-wise formulas without any matrix machinery.
Eigen::VectorXd naive_rhs(const Grid& g, const Eigen::VectorXd& w, double f, const Eigen::VectorXd& b) {
  const int n = g.n();
  const Eigen::Index N = g.size();
  auto at = [&](int field, int i, int j) {
    i = (i % n + n) % n;
    j = (j % n + n) % n;
    return w[field * N + g.index(i, j)];
  };
  auto bat = [&](int i, int j) {
    if (b.size() == 0) return 0.0;
    i = (i % n + n) % n;
    j = (j % n + n) % n;
    return b[g.index(i, j)];
  };
  auto ddx = [&](auto&& q, int i, int j) { return (q(i + 1, j) - q(i - 1, j)) / (2 * g.dx()); };
  auto ddy = [&](auto&& q, int i, int j) { return (q(i, j + 1) - q(i, j - 1)) / (2 * g.dy()); };
  auto H = [&](int i, int j) { return at(0, i, j); };
  auto U = [&](int i, int j) { return at(1, i, j); };
  auto V = [&](int i, int j) { return at(2, i, j); };
  auto S = [&](int i, int j) { return at(3, i, j); };
  auto UH = [&](int i, int j) { return U(i, j) * H(i, j); };
  auto VH = [&](int i, int j) { return V(i, j) * H(i, j); };

  Eigen::VectorXd out(4 * N);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const Eigen::Index k = g.index(i, j);
      const double h = H(i, j), u = U(i, j), v = V(i, j), s = S(i, j);
      out[k] = -ddx(UH, i, j) - ddy(VH, i, j);
      out[N + k] = -u * ddx(U, i, j) - v * ddy(U, i, j) - 0.5 * h * ddx(S, i, j) - s * ddx(H, i, j) -
                   s * ddx(bat, i, j) + f * v;
      out[2 * N + k] = -u * ddx(V, i, j) - v * ddy(V, i, j) - 0.5 * h * ddy(S, i, j) - s * ddy(H, i, j) -
                       s * ddy(bat, i, j) - f * u;
      out[3 * N + k] = -u * ddx(S, i, j) - v * ddy(S, i, j);
    }
  }
  return out;
}

ConservedQuantities naive_invariants(const Grid& g, const State& w, double f, const Eigen::VectorXd& b) {
  const int n = g.n();
  const double area = g.dx() * g.dy();
  auto wrap = [n](int i) { return (i % n + n) % n; };
  ConservedQuantities q;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const Eigen::Index k = g.index(i, j);
      const double h = w.h()[k], u = w.u()[k], v = w.v()[k], s = w.s()[k];
      const double bk = b.size() ? b[k] : 0.0;
      q.energy += (0.5 * h * h * s + h * s * bk + h * (u * u + v * v) / 2) * area;
      q.mass += h * area;
      q.vorticity += ((w.v()[g.index(wrap(i + 1), j)] - w.v()[g.index(wrap(i - 1), j)]) / (2 * g.dx()) -
                      (w.u()[g.index(i, wrap(j + 1))] - w.u()[g.index(i, wrap(j - 1))]) / (2 * g.dy()) + f) *
                     area;
      q.buoyancy += h * s * area;
    }
  }
  return q;
}

State constant_state(Eigen::Index nodes, double h0, double u0, double v0, double s0) {
  State w(nodes);
  w.h().setConstant(h0);
  w.u().setConstant(u0);
  w.v().setConstant(v0);
  w.s().setConstant(s0);
  return w;
}

}  // namespace

TEST_SUITE("fom") {

TEST_CASE("constant state is a fixed point") {
  const Grid g = Grid::square(6, 10.0);
  const DiffOperators ops = build_diff_2d(g);
  const State w = constant_state(g.size(), 750.0, 0.0, 0.0, 9.8);
  const PhysicalParams p = PhysicalParams::with_coriolis(6.147e-5);
  CHECK(rhs(w, p, ops).stacked().cwiseAbs().maxCoeff() == 0.0);
  CHECK((kahan_step(w, 486.0, p, ops).stacked() - w.stacked()).cwiseAbs().maxCoeff() == 0.0);
  const Trajectory t = simulate(w, 10.0, 5, p, ops);
  REQUIRE(t.states.cols() == 6);
  for (Eigen::Index k = 0; k < 6; ++k) CHECK((t.states.col(k) - w.stacked()).norm() == 0.0);
}

TEST_CASE("uniform flow sees only the Coriolis force") {
  const Grid g = Grid::square(5, 1.0);
  const DiffOperators ops = build_diff_2d(g);
  const double f = 1e-4, u0 = 3.0;
  const State w = constant_state(g.size(), 100.0, u0, 0.0, 2.0);
  const State F = rhs(w, PhysicalParams::with_coriolis(f), ops);
  CHECK(F.h().cwiseAbs().maxCoeff() == 0.0);
  CHECK(F.u().cwiseAbs().maxCoeff() == 0.0);
  CHECK((F.v().array() + f * u0).abs().maxCoeff() == 0.0);
  CHECK(F.s().cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("rhs agrees with a loop-based stencil") {
  const Grid g(8, 0.0, 8.0, 0.0, 4.0);
  const DiffOperators ops = build_diff_2d(g);
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    const State w = testing::random_state(g.size(), seed);
    PhysicalParams p = PhysicalParams::with_coriolis(0.7);
    const Eigen::VectorXd expected = naive_rhs(g, w.stacked(), p.f, p.topography);
    CHECK(testing::rel_diff(rhs(w, p, ops).stacked(), expected) <= 1e-13);

    p.topography = 0.2 * testing::random_vector(g.size(), seed + 100);
    const Eigen::VectorXd with_b = naive_rhs(g, w.stacked(), p.f, p.topography);
    CHECK(testing::rel_diff(rhs(w, p, ops).stacked(), with_b) <= 1e-13);
  }
}

TEST_CASE("rhs rejects mismatched sizes") {
  const Grid g = Grid::square(4, 1.0);
  const DiffOperators ops = build_diff_2d(g);
  const State w(9);
  CHECK_THROWS_AS(rhs(w, PhysicalParams{}, ops), ShapeError);
  PhysicalParams p;
  p.topography = Eigen::VectorXd::Zero(3);
  CHECK_THROWS_AS(rhs(State(16), p, ops), ShapeError);
  CHECK_THROWS_AS(State(Eigen::VectorXd::Zero(7)), ShapeError);
}

TEST_CASE("Jacobian at the fixed point") {
  const Grid g = Grid::square(5, 2.0);
  const DiffOperators ops = build_diff_2d(g);
  const double f = 0.3, s0 = 1.7, h0 = 4.0;
  const State w = constant_state(g.size(), h0, 0.0, 0.0, s0);
  const Eigen::MatrixXd J = jacobian(w, PhysicalParams::with_coriolis(f), ops);
  const Eigen::Index N = g.size();
  const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(N, N);
  const Eigen::MatrixXd Dx = ops.dx, Dy = ops.dy;
  CHECK((J.block(N, 2 * N, N, N) - f * I).norm() == 0.0);
  CHECK((J.block(2 * N, N, N, N) + f * I).norm() == 0.0);
  CHECK((J.block(N, 0, N, N) + s0 * Dx).norm() <= 1e-14 * Dx.norm());
  CHECK((J.block(2 * N, 0, N, N) + s0 * Dy).norm() <= 1e-14 * Dy.norm());
  CHECK((J.block(N, 3 * N, N, N) + 0.5 * h0 * Dx).norm() <= 1e-14 * h0 * Dx.norm());
  CHECK((J.block(0, N, N, N) + h0 * Dx).norm() <= 1e-14 * h0 * Dx.norm());
}

TEST_CASE("Jacobian matches central differences") {
  const Grid g = Grid::square(8, 8.0);
  const DiffOperators ops = build_diff_2d(g);
  PhysicalParams p = PhysicalParams::with_coriolis(0.5);
  p.topography = 0.1 * testing::random_vector(g.size(), 77);
  const State w = testing::random_state(g.size(), 5);
  const Eigen::MatrixXd J = jacobian(w, p, ops);
  const double eps = 1e-6;
  double worst = 0.0;
  for (Eigen::Index i = 0; i < 4 * g.size(); ++i) {
    State plus = w, minus = w;
    plus.stacked()[i] += eps;
    minus.stacked()[i] -= eps;
    const Eigen::VectorXd fd = (rhs(plus, p, ops).stacked() - rhs(minus, p, ops).stacked()) / (2 * eps);
    worst = std::max(worst, (fd - J.col(i)).norm());
  }
  CHECK(worst <= 1e-6);
}

TEST_CASE("Jacobian is affine in the state") {
  const Grid g = Grid::square(4, 4.0);
  const DiffOperators ops = build_diff_2d(g);
  const PhysicalParams p = PhysicalParams::with_coriolis(0.9);
  const State w = testing::random_state(g.size(), 11);
  const double alpha = -2.5;
  const Eigen::MatrixXd lin = jacobian(State(g.size()), p, ops);
  const Eigen::MatrixXd quad = Eigen::MatrixXd(jacobian(w, p, ops)) - lin;
  const Eigen::MatrixXd quad_scaled = Eigen::MatrixXd(jacobian(State(Eigen::VectorXd(alpha * w.stacked())), p, ops)) - lin;
  CHECK((quad_scaled - alpha * quad).norm() <= 1e-13 * quad.norm());
}

TEST_CASE("Kahan step on pure rotation is the Cayley transform") {
  const Grid g = Grid::square(4, 1.0);
  const DiffOperators ops = build_diff_2d(g);
  const double f = 1.0, dt = 0.2;
  const State w = constant_state(g.size(), 1.0, 1.0, 0.0, 1.0);
  const State next = kahan_step(w, dt, PhysicalParams::with_coriolis(f), ops);
  // d(u,v)/dt = A(u,v) with A = [[0, f], [-f, 0]].
  Eigen::Matrix2d A;
  A << 0, f, -f, 0;
  const Eigen::Matrix2d I = Eigen::Matrix2d::Identity();
  const Eigen::Vector2d expected = (I - dt / 2 * A).inverse() * (I + dt / 2 * A) * Eigen::Vector2d(1, 0);
  for (Eigen::Index k = 0; k < g.size(); ++k) {
    CHECK(next.u()[k] == doctest::Approx(expected[0]).epsilon(1e-14));
    CHECK(next.v()[k] == doctest::Approx(expected[1]).epsilon(1e-14));
    CHECK(std::abs(next.u()[k] * next.u()[k] + next.v()[k] * next.v()[k] - 1.0) <= 1e-15);
  }
  CHECK(next.h().cwiseAbs().maxCoeff() == 1.0);
}

TEST_CASE("Kahan step rejects non-positive dt") {
  const Grid g = Grid::square(4, 1.0);
  const DiffOperators ops = build_diff_2d(g);
  const State w = constant_state(g.size(), 1, 0, 0, 1);
  CHECK_THROWS_AS(kahan_step(w, 0.0, PhysicalParams{}, ops), InvalidArgument);
  CHECK_THROWS_AS(simulate(w, 1.0, 0, PhysicalParams{}, ops), InvalidArgument);
}

TEST_CASE("singular Kahan system is reported") {
  const Grid g = Grid::square(4, 1.0);
  const DiffOperators ops = build_diff_2d(g);
  // With f = 2/dt on a rotation-only state the system is I - [[0,1],[-1,0]],
  // which is regular; with a real eigenvalue 2/dt it becomes singular. A
  // uniform-s state with h-advection gives no such eigenvalue, so instead
  // check the failure path with a non-finite state.
  State w = constant_state(g.size(), 1, 0, 0, 1);
  w.u()[0] = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(kahan_step(w, 1.0, PhysicalParams::with_coriolis(1.0), ops), SolveError);
}

TEST_CASE("simulate with one step equals one Kahan step") {
  const Grid g = Grid::square(8, 5.0e6);
  const DiffOperators ops = build_diff_2d(g);
  const PhysicalParams p = PhysicalParams::with_coriolis(6.147e-5);
  const State w0 = double_vortex_initial(g, p, DoubleVortexScenario::with_length(5.0e6));
  const Trajectory t = simulate(w0, 486.0, 1, p, ops);
  REQUIRE(t.steps() == 1);
  CHECK(t.time(1) == 486.0);
  CHECK((t.states.col(0) - w0.stacked()).norm() == 0.0);
  CHECK((t.states.col(1) - kahan_step(w0, 486.0, p, ops).stacked()).norm() == 0.0);
}

TEST_CASE("iterative and direct solvers agree") {
  const Grid g = Grid::square(16, 5.0e6);
  const DiffOperators ops = build_diff_2d(g);
  const PhysicalParams p = PhysicalParams::with_coriolis(6.147e-5);
  const State w0 = double_vortex_initial(g, p, DoubleVortexScenario::with_length(5.0e6));
  KahanOptions lu, it;
  lu.solver = LinearSolver::sparse_lu;
  it.solver = LinearSolver::bicgstab;
  const Trajectory a = simulate(w0, 486.0, 5, p, ops, lu);
  const Trajectory b = simulate(w0, 486.0, 5, p, ops, it);
  CHECK(testing::rel_diff(b.states, a.states) <= 1e-11);
}

TEST_CASE("Kahan method converges at second order") {
  const double L = 5.0e6;
  const Grid g = Grid::square(16, L);
  const DiffOperators ops = build_diff_2d(g);
  const PhysicalParams p = PhysicalParams::with_coriolis(6.147e-5);
  const State w0 = double_vortex_initial(g, p, DoubleVortexScenario::with_length(L));
  const double T = 16 * 486.0;
  auto terminal = [&](int steps) {
    return Eigen::VectorXd(simulate(w0, T / steps, steps, p, ops).states.rightCols(1));
  };
  const Eigen::VectorXd reference = terminal(16 * 16);
  const double coarse = (terminal(8) - reference).norm();
  const double fine = (terminal(16) - reference).norm();
  CHECK(coarse / fine >= 3.5);
  CHECK(coarse / fine <= 4.5);
}

TEST_CASE("linear invariants are preserved along a double-vortex run") {
  const double L = 5.0e6;
  const Grid g = Grid::square(32, L);
  const DiffOperators ops = build_diff_2d(g);
  const PhysicalParams p = PhysicalParams::with_coriolis(6.147e-5);
  const State w0 = double_vortex_initial(g, p, DoubleVortexScenario::with_length(L));
  const Trajectory t = simulate(w0, 486.0, 250, p, ops);
  const auto series = invariant_series(t, p, g);
  REQUIRE(series.size() == 251);
  double mass = 0.0, vort = 0.0;
  for (const auto& q : series) {
    mass = std::max(mass, std::abs(q.mass - series[0].mass) / std::abs(series[0].mass));
    vort = std::max(vort, std::abs(q.vorticity - series[0].vorticity) / std::abs(series[0].vorticity));
  }
  CHECK(mass <= 1e-12);
  CHECK(vort <= 1e-12);
}

TEST_CASE("conserved quantities of a constant state") {
  const double L = 3.0, h0 = 2.0, s0 = 0.5, f = 0.25;
  const Grid g = Grid::square(6, L);
  const State w = constant_state(g.size(), h0, 0, 0, s0);
  const ConservedQuantities q = conserved_quantities(w, PhysicalParams::with_coriolis(f), g);
  CHECK(q.energy == doctest::Approx(0.5 * h0 * h0 * s0 * L * L).epsilon(1e-14));
  CHECK(q.mass == doctest::Approx(h0 * L * L).epsilon(1e-14));
  CHECK(q.vorticity == doctest::Approx(f * L * L).epsilon(1e-14));
  CHECK(q.buoyancy == doctest::Approx(h0 * s0 * L * L).epsilon(1e-14));
}

TEST_CASE("vorticity of a motionless state is f times area") {
  const Grid g = Grid::square(7, 2.0);
  State w = testing::random_state(g.size(), 9);
  w.u().setZero();
  w.v().setZero();
  const ConservedQuantities q = conserved_quantities(w, PhysicalParams::with_coriolis(0.1), g);
  CHECK(q.vorticity == doctest::Approx(0.1 * 4.0).epsilon(1e-14));
}

TEST_CASE("conserved quantities match a loop-based evaluation") {
  const Grid g(8, 0.0, 8.0, 0.0, 4.0);
  for (std::uint64_t seed : {21u, 22u}) {
    const State w = testing::random_state(g.size(), seed);
    PhysicalParams p = PhysicalParams::with_coriolis(0.4);
    p.topography = 0.3 * testing::random_vector(g.size(), seed + 1);
    const ConservedQuantities got = conserved_quantities(w, p, g);
    const ConservedQuantities want = naive_invariants(g, w, p.f, p.topography);
    CHECK(std::abs(got.energy - want.energy) <= 1e-13 * std::abs(want.energy));
    CHECK(std::abs(got.mass - want.mass) <= 1e-13 * std::abs(want.mass));
    CHECK(std::abs(got.vorticity - want.vorticity) <= 1e-13 * std::abs(want.vorticity));
    CHECK(std::abs(got.buoyancy - want.buoyancy) <= 1e-13 * std::abs(want.buoyancy));
  }
}

TEST_CASE("double-vortex initial condition") {
  const double L = 5.0e6;
  const DoubleVortexScenario sc = DoubleVortexScenario::with_length(L);
  CHECK(sc.mean_height == 750.0);
  CHECK(sc.height_amplitude == 75.0);
  CHECK(sc.sigma_x == doctest::Approx(3 * L / 40));
  CHECK(sc.offset_x == 0.1);
  CHECK(sc.offset_y == 0.1);
  const PhysicalParams p = PhysicalParams::with_coriolis(6.147e-5);
  CHECK(p.g == 9.80616);

  const Grid g = Grid::square(64, L);
  const State w = double_vortex_initial(g, p, sc);
  // n is even, so x = L/2 is node i = n/2.
  for (int j = 0; j < 64; j += 7) CHECK(w.s()[g.index(32, j)] == doctest::Approx(p.g).epsilon(1e-15));
  CHECK(std::abs(w.h().mean() - sc.mean_height) / sc.mean_height <= 1e-3);
  CHECK(w.h().minCoeff() > 0.0);

  PhysicalParams zero = p;
  zero.f = 0.0;
  CHECK_THROWS_AS(double_vortex_initial(g, zero, sc), InvalidArgument);
  CHECK_THROWS_AS(double_vortex_initial(Grid::square(8, 1.0), p, sc), InvalidArgument);
}

TEST_CASE("double vortex is symmetric under the point reflection about the centre") {
  // The two vortices sit at (0.5 -+ o) L; reflecting x -> L - x, y -> L - y
  // swaps them, keeps h and flips the sign of the velocities.
  const double L = 5.0e6;
  const int n = 16;
  const Grid g = Grid::square(n, L);
  const PhysicalParams p = PhysicalParams::with_coriolis(6.147e-5);
  const State w = double_vortex_initial(g, p, DoubleVortexScenario::with_length(L));
  for (int i = 1; i < n; ++i) {
    for (int j = 1; j < n; ++j) {
      const Eigen::Index a = g.index(i, j), b = g.index(n - i, n - j);
      CHECK(w.h()[a] == doctest::Approx(w.h()[b]).epsilon(1e-12));
      CHECK(w.u()[a] == doctest::Approx(-w.u()[b]).epsilon(1e-9).scale(1.0));
    }
  }
}

TEST_CASE("latitude-derived Coriolis parameter") {
  CHECK(coriolis_from_latitude(0.0) == 0.0);
  CHECK(coriolis_from_latitude(std::numbers::pi / 2) == doctest::Approx(2 * 7.292e-5));
  const PhysicalParams p = PhysicalParams::at_latitude(std::numbers::pi / 6);
  CHECK(p.f == doctest::Approx(7.292e-5));
  REQUIRE(p.latitude.has_value());
}

}
