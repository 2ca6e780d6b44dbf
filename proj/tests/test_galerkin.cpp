#include <cmath>
#include <filesystem>
#include <numbers>

#include <doctest.h>

#include <Eigen/QR>

#include "helpers.hpp"
#include "romswe/error.hpp"
#include "romswe/galerkin.hpp"
#include "romswe/pod.hpp"

using namespace romswe;

namespace {

PodBasis random_basis(Eigen::Index nodes, int r, std::uint64_t seed) {
  PodBasis b;
  for (int j = 0; j < 4; ++j) {
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(testing::random_matrix(nodes, r, seed + j));
    b.modes[j] = qr.householderQ() * Eigen::MatrixXd::Identity(nodes, r);
    b.singular_values[j] = Eigen::VectorXd::Ones(r);
  }
  return b;
}

PodBasis identity_basis(Eigen::Index nodes) {
  PodBasis b;
  for (int j = 0; j < 4; ++j) {
    b.modes[j] = Eigen::MatrixXd::Identity(nodes, nodes);
    b.singular_values[j] = Eigen::VectorXd::Ones(nodes);
  }
  return b;
}

Eigen::MatrixXd dense_kron(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  Eigen::MatrixXd k(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j) k.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return k;
}

// Explicit N x N^2 matricized tensor with Q (a ⊗ b) = a ∘ b.
Eigen::MatrixXd hadamard_tensor(Eigen::Index n) {
  Eigen::MatrixXd q = Eigen::MatrixXd::Zero(n, n * n);
  for (Eigen::Index i = 0; i < n; ++i) q(i, i * n + i) = 1.0;
  return q;
}

}  // namespace

TEST_SUITE("galerkin") {

TEST_CASE("row-wise Kronecker realizes the Hadamard tensor") {
  const Eigen::Index n = 6;
  const Eigen::VectorXd a = testing::random_vector(n, 1), b = testing::random_vector(n, 2);
  const Eigen::MatrixXd q = hadamard_tensor(n);
  CHECK((q * dense_kron(a, b) - a.cwiseProduct(b)).norm() == 0.0);

  const Eigen::MatrixXd A = testing::random_matrix(n, 3, 3), B = testing::random_matrix(n, 2, 4);
  const Eigen::VectorXd x = testing::random_vector(3, 5), y = testing::random_vector(2, 6);
  const Eigen::VectorXd lhs = rowwise_kron(A, B) * dense_kron(x, y);
  CHECK((lhs - (A * x).cwiseProduct(B * y)).norm() <= 1e-14 * lhs.norm());
  CHECK((rowwise_kron(A, B) - q * dense_kron(A, B)).norm() <= 1e-14);
  CHECK_THROWS_AS(rowwise_kron(A, testing::random_matrix(n + 1, 2, 7)), ShapeError);
}

TEST_CASE("tensorial blocks match the dense oracle") {
  const Grid g(4, 0.0, 4.0, 0.0, 2.0);
  const DiffOperators ops = build_diff_2d(g);
  const Eigen::MatrixXd Dx = ops.dx, Dy = ops.dy;
  const Eigen::MatrixXd Q = hadamard_tensor(g.size());
  for (int r : {2, 3}) {
    const PodBasis basis = random_basis(g.size(), r, 10 * r);
    const auto& Ph = basis.basis(Field::h);
    const auto& Pu = basis.basis(Field::u);
    const auto& Pv = basis.basis(Field::v);
    const auto& Ps = basis.basis(Field::s);
    struct Expect {
      const char* name;
      Eigen::MatrixXd value;
    };
    const Expect expected[] = {
        {"h_flux_x", -Ph.transpose() * Dx * Q * dense_kron(Ph, Pu)},
        {"h_flux_y", -Ph.transpose() * Dy * Q * dense_kron(Ph, Pv)},
        {"u_advect_x", -Pu.transpose() * Q * dense_kron(Dx * Pu, Pu)},
        {"u_advect_y", -Pu.transpose() * Q * dense_kron(Pv, Dy * Pu)},
        {"u_height_buoyancy_gradient", -0.5 * Pu.transpose() * Q * dense_kron(Ph, Dx * Ps)},
        {"u_buoyancy_height_gradient", -Pu.transpose() * Q * dense_kron(Ps, Dx * Ph)},
        {"v_advect_x", -Pv.transpose() * Q * dense_kron(Dx * Pv, Pu)},
        {"v_advect_y", -Pv.transpose() * Q * dense_kron(Pv, Dy * Pv)},
        {"v_height_buoyancy_gradient", -0.5 * Pv.transpose() * Q * dense_kron(Ph, Dy * Ps)},
        {"v_buoyancy_height_gradient", -Pv.transpose() * Q * dense_kron(Ps, Dy * Ph)},
        {"s_advect_x", -Ps.transpose() * Q * dense_kron(Dx * Ps, Pu)},
        {"s_advect_y", -Ps.transpose() * Q * dense_kron(Dy * Ps, Pv)},
    };
    const auto terms = assemble_reduced_quadratic(basis, ops);
    REQUIRE(terms.size() == 12);
    for (const auto& e : expected) {
      CAPTURE(e.name);
      const auto it = std::find_if(terms.begin(), terms.end(), [&](const QuadraticTerm& t) { return t.name == e.name; });
      REQUIRE(it != terms.end());
      CHECK(it->matrix.rows() == r);
      CHECK(it->matrix.cols() == r * r);
      CHECK((it->matrix - e.value).norm() <= 1e-12 * std::max(1.0, e.value.norm()));
    }
  }
}

TEST_CASE("r = 1 blocks are scalars") {
  const Grid g = Grid::square(5, 1.0);
  const DiffOperators ops = build_diff_2d(g);
  const PodBasis basis = random_basis(g.size(), 1, 3);
  const ReducedModel m = assemble_galerkin(basis, PhysicalParams::with_coriolis(1.0), ops);
  const Eigen::VectorXd ph = basis.basis(Field::h).col(0), pu = basis.basis(Field::u).col(0);
  const double expected = -ph.dot(ops.dx * ph.cwiseProduct(pu));
  const QuadraticTerm* t = m.find_quadratic("h_flux_x");
  REQUIRE(t != nullptr);
  CHECK(t->matrix(0, 0) == doctest::Approx(expected).epsilon(1e-14));
}

TEST_CASE("linear blocks") {
  const Grid g = Grid::square(5, 1.0);
  const DiffOperators ops = build_diff_2d(g);
  PodBasis basis = random_basis(g.size(), 3, 40);
  basis.modes[index_of(Field::v)] = basis.modes[index_of(Field::u)];
  const auto flat = assemble_reduced_linear(basis, PhysicalParams::with_coriolis(1.0), ops);
  ReducedModel m(3);
  for (const auto& t : flat) m.add(t);
  CHECK((m.find_linear("u_coriolis")->matrix - Eigen::MatrixXd::Identity(3, 3)).norm() <= 1e-14);
  CHECK((m.find_linear("v_coriolis")->matrix + Eigen::MatrixXd::Identity(3, 3)).norm() <= 1e-14);
  CHECK(m.find_linear("u_coriolis")->coriolis);
  CHECK(m.find_linear("u_topography")->matrix.norm() == 0.0);
  CHECK(m.find_linear("v_topography")->matrix.norm() == 0.0);

  const PhysicalParams at = PhysicalParams::at_latitude(std::numbers::pi / 6);
  CHECK(at.f == doctest::Approx(7.292e-5).epsilon(1e-15));
  // The Coriolis value enters affinely.
  const Eigen::VectorXd z = testing::random_vector(12, 2);
  CHECK((m.linear_rhs(z, 2.0) - 2.0 * m.linear_rhs(z, 1.0)).norm() <= 1e-14 * z.norm());
  CHECK((m.linear_operator(0.7) - m.jacobian(Eigen::VectorXd::Zero(12), 0.7)).norm() <= 1e-15);
}

TEST_CASE("complete basis reproduces the full-order right-hand side") {
  const Grid g(3, 0.0, 3.0, 0.0, 1.5);
  const DiffOperators ops = build_diff_2d(g);
  PhysicalParams p = PhysicalParams::with_coriolis(0.8);
  p.topography = 0.3 * testing::random_vector(g.size(), 7);
  for (const PodBasis& basis : {identity_basis(g.size()), random_basis(g.size(), 9, 50)}) {
    const ReducedModel m = assemble_galerkin(basis, p, ops);
    for (std::uint64_t seed : {1u, 2u}) {
      const Eigen::VectorXd z = testing::random_vector(4 * g.size(), seed);
      const Eigen::VectorXd full = project(basis, rhs(lift(basis, z), p, ops));
      CHECK(testing::rel_diff(m.rhs(z, p.f), full) <= 1e-11);
      const Eigen::MatrixXd J = lift_columns(basis, Eigen::MatrixXd::Identity(4 * g.size(), 4 * g.size()));
      const Eigen::MatrixXd fj = J.transpose() * Eigen::MatrixXd(jacobian(lift(basis, z), p, ops)) * J;
      CHECK(testing::rel_diff(m.jacobian(z, p.f), fj) <= 1e-11);
    }
  }
}

TEST_CASE("reduced right-hand side: origin and scaling") {
  const Grid g = Grid::square(6, 2.0);
  const DiffOperators ops = build_diff_2d(g);
  const ReducedModel m = assemble_galerkin(random_basis(g.size(), 4, 60), PhysicalParams::with_coriolis(0.5), ops);
  CHECK(m.rhs(Eigen::VectorXd::Zero(16), 0.5).norm() == 0.0);
  const Eigen::VectorXd z = testing::random_vector(16, 3);
  const double alpha = 1.7;
  const Eigen::VectorXd q = m.quadratic_rhs(z);
  CHECK((m.quadratic_rhs(alpha * z) - alpha * alpha * q).norm() <= 1e-13 * q.norm());
  CHECK((m.rhs(z, 0.5) - m.linear_rhs(z, 0.5) - q).norm() <= 1e-13 * q.norm());
  CHECK_THROWS_AS(m.rhs(Eigen::VectorXd::Zero(15), 0.5), ShapeError);
}

TEST_CASE("reduced Jacobian matches central differences") {
  const Grid g = Grid::square(8, 8.0);
  const DiffOperators ops = build_diff_2d(g);
  const int r = 5;
  const ReducedModel m = assemble_galerkin(random_basis(g.size(), r, 70), PhysicalParams::with_coriolis(0.4), ops);
  const Eigen::VectorXd z = testing::random_vector(4 * r, 8);
  const Eigen::MatrixXd J = m.jacobian(z, 0.4);
  const double eps = 1e-6;
  for (Eigen::Index i = 0; i < 4 * r; ++i) {
    Eigen::VectorXd zp = z, zm = z;
    zp[i] += eps;
    zm[i] -= eps;
    CHECK(((m.rhs(zp, 0.4) - m.rhs(zm, 0.4)) / (2 * eps) - J.col(i)).norm() <= 1e-6);
  }
  // The quadratic part of the Jacobian is linear in z.
  const Eigen::MatrixXd A = m.linear_operator(0.4);
  const Eigen::MatrixXd Jq = J - A;
  const Eigen::VectorXd y = testing::random_vector(4 * r, 9);
  const Eigen::MatrixXd Jy = m.jacobian(y, 0.4) - A, Jsum = m.jacobian(Eigen::VectorXd(z - 3.0 * y), 0.4) - A;
  CHECK((Jsum - (Jq - 3.0 * Jy)).norm() <= 1e-12 * Jq.norm());
}

TEST_CASE("reduced trajectories") {
  const Grid g = Grid::square(3, 3.0);
  const DiffOperators ops = build_diff_2d(g);
  const PhysicalParams p = PhysicalParams::with_coriolis(0.3);
  const PodBasis basis = random_basis(g.size(), 9, 80);
  const ReducedModel m = assemble_galerkin(basis, p, ops);

  const ReducedTrajectory zero = simulate_reduced(m, Eigen::VectorXd::Zero(36), 0.1, 10, p.f);
  CHECK(zero.states.norm() == 0.0);
  CHECK(zero.steps() == 10);

  State w0(g.size());
  w0.h() = Eigen::VectorXd::Constant(g.size(), 2.0) + 0.1 * testing::random_vector(g.size(), 1);
  w0.u() = 0.1 * testing::random_vector(g.size(), 2);
  w0.v() = 0.1 * testing::random_vector(g.size(), 3);
  w0.s() = Eigen::VectorXd::Constant(g.size(), 1.0) + 0.05 * testing::random_vector(g.size(), 4);
  const Trajectory fom = simulate(w0, 0.05, 50, p, ops);
  const ReducedTrajectory rom = simulate_reduced(m, project(basis, w0), 0.05, 50, p.f);
  CHECK(testing::rel_diff(lift_columns(basis, rom.states), fom.states) <= 1e-9);
  CHECK_THROWS_AS(simulate_reduced(m, Eigen::VectorXd::Zero(36), 0.1, 0, p.f), InvalidArgument);
}

TEST_CASE("memory guard") {
  const Grid g = Grid::square(4, 1.0);
  const DiffOperators ops = build_diff_2d(g);
  GalerkinOptions tight;
  tight.max_kron_width = 8;
  CHECK_THROWS_AS(assemble_reduced_quadratic(random_basis(g.size(), 3, 1), ops, tight), ResourceError);
  CHECK_NOTHROW(assemble_reduced_quadratic(random_basis(g.size(), 2, 1), ops, tight));
}

TEST_CASE("model persistence") {
  const Grid g = Grid::square(5, 1.0);
  const DiffOperators ops = build_diff_2d(g);
  PhysicalParams p = PhysicalParams::with_coriolis(0.2);
  p.topography = testing::random_vector(g.size(), 4);
  const ReducedModel m = assemble_galerkin(random_basis(g.size(), 3, 90), p, ops);
  const auto path = std::filesystem::temp_directory_path() / "romswe_model_test.bin";
  save_model(m, path);
  const ReducedModel back = load_model(path);
  REQUIRE(back.quadratic_terms().size() == m.quadratic_terms().size());
  REQUIRE(back.linear_terms().size() == m.linear_terms().size());
  const Eigen::VectorXd z = testing::random_vector(12, 5);
  CHECK(back.rhs(z, 0.2) == m.rhs(z, 0.2));
  CHECK(back.find_linear("u_coriolis")->coriolis);
  CHECK_FALSE(back.find_linear("u_topography")->coriolis);
  CHECK(back.find_quadratic("u_height_buoyancy_gradient")->left == Field::h);
  CHECK(back.find_quadratic("u_height_buoyancy_gradient")->right == Field::s);
}

TEST_CASE("term shapes are enforced") {
  ReducedModel m(2);
  CHECK_THROWS_AS(m.add(QuadraticTerm{"bad", Field::h, Field::h, Field::u, Eigen::MatrixXd::Zero(2, 3)}), ShapeError);
  CHECK_THROWS_AS(m.add(LinearTerm{"bad", Field::u, Field::v, Eigen::MatrixXd::Zero(3, 2), true}), ShapeError);
}

}
