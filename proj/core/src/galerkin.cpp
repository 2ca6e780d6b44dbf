#include "romswe/galerkin.hpp"

#include <string>

#include "romswe/error.hpp"
#include "romswe/parallel.hpp"

namespace romswe {

Eigen::MatrixXd rowwise_kron(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  if (a.rows() != b.rows()) throw ShapeError("rowwise_kron operands need equal row counts");
  const Eigen::Index ra = a.cols(), rb = b.cols();
  Eigen::MatrixXd g(a.rows(), ra * rb);
  for (Eigen::Index i = 0; i < ra; ++i)
    g.middleCols(i * rb, rb) = b.array().colwise() * a.col(i).array();
  return g;
}

std::vector<LinearTerm> assemble_reduced_linear(const PodBasis& basis, const PhysicalParams& params,
                                                const DiffOperators& ops) {
  const Eigen::MatrixXd& pu = basis.basis(Field::u);
  const Eigen::MatrixXd& pv = basis.basis(Field::v);
  const Eigen::MatrixXd& ps = basis.basis(Field::s);
  std::vector<LinearTerm> terms;
  terms.push_back({"u_coriolis", Field::u, Field::v, pu.transpose() * pv, true});
  terms.push_back({"v_coriolis", Field::v, Field::u, -(pv.transpose() * pu), true});
  const int r = basis.dim();
  if (params.has_topography()) {
    if (params.topography.size() != basis.nodes()) throw ShapeError("topography length differs from the grid");
    const Eigen::VectorXd bx = ops.dx * params.topography;
    const Eigen::VectorXd by = ops.dy * params.topography;
    terms.push_back({"u_topography", Field::u, Field::s, -(pu.transpose() * bx.asDiagonal() * ps), false});
    terms.push_back({"v_topography", Field::v, Field::s, -(pv.transpose() * by.asDiagonal() * ps), false});
  } else {
    terms.push_back({"u_topography", Field::u, Field::s, Eigen::MatrixXd::Zero(r, r), false});
    terms.push_back({"v_topography", Field::v, Field::s, Eigen::MatrixXd::Zero(r, r), false});
  }
  return terms;
}

namespace {

enum class Outer { none, dx, dy };

struct BlockSpec {
  const char* name;
  Field eq, left, right;
  // Derivative applied to the left or right basis inside the product, or to the
  // product as a whole.
  Outer left_diff, right_diff, outer;
  double scale;
};

// Each entry is -scale * Phi_eq^T [outer] Q((D_l Phi_left) ⊗ (D_r Phi_right)).
constexpr BlockSpec kBlocks[] = {
    {"u_advect_x", Field::u, Field::u, Field::u, Outer::dx, Outer::none, Outer::none, 1.0},
    {"v_advect_x", Field::v, Field::v, Field::u, Outer::dx, Outer::none, Outer::none, 1.0},
    {"h_flux_x", Field::h, Field::h, Field::u, Outer::none, Outer::none, Outer::dx, 1.0},
    {"u_advect_y", Field::u, Field::v, Field::u, Outer::none, Outer::dy, Outer::none, 1.0},
    {"v_advect_y", Field::v, Field::v, Field::v, Outer::none, Outer::dy, Outer::none, 1.0},
    {"s_advect_x", Field::s, Field::s, Field::u, Outer::dx, Outer::none, Outer::none, 1.0},
    {"h_flux_y", Field::h, Field::h, Field::v, Outer::none, Outer::none, Outer::dy, 1.0},
    {"u_height_buoyancy_gradient", Field::u, Field::h, Field::s, Outer::none, Outer::dx, Outer::none, 0.5},
    {"v_height_buoyancy_gradient", Field::v, Field::h, Field::s, Outer::none, Outer::dy, Outer::none, 0.5},
    {"s_advect_y", Field::s, Field::s, Field::v, Outer::dy, Outer::none, Outer::none, 1.0},
    {"u_buoyancy_height_gradient", Field::u, Field::s, Field::h, Outer::none, Outer::dx, Outer::none, 1.0},
    {"v_buoyancy_height_gradient", Field::v, Field::s, Field::h, Outer::none, Outer::dy, Outer::none, 1.0},
};

const SparseMatrix& pick(const DiffOperators& ops, Outer d) { return d == Outer::dx ? ops.dx : ops.dy; }

Eigen::MatrixXd factor(const PodBasis& basis, Field f, Outer d, const DiffOperators& ops) {
  if (d == Outer::none) return basis.basis(f);
  return pick(ops, d) * basis.basis(f);
}

}  // namespace

std::vector<QuadraticTerm> assemble_reduced_quadratic(const PodBasis& basis, const DiffOperators& ops,
                                                      const GalerkinOptions& options) {
  const Eigen::Index r = basis.dim();
  if (r * r > options.max_kron_width)
    throw ResourceError("r^2 = " + std::to_string(r * r) + " exceeds the Kronecker width cap " +
                        std::to_string(options.max_kron_width));
  if (ops.dx.rows() != basis.nodes()) throw ShapeError("operators and basis disagree on N");

  constexpr std::size_t count = std::size(kBlocks);
  std::vector<QuadraticTerm> terms(count);
  parallel_for(count, [&](std::size_t k) {
    const BlockSpec& spec = kBlocks[k];
    Eigen::MatrixXd g = rowwise_kron(factor(basis, spec.left, spec.left_diff, ops),
                                     factor(basis, spec.right, spec.right_diff, ops));
    if (spec.outer != Outer::none) g = pick(ops, spec.outer) * g;
    terms[k] = QuadraticTerm{spec.name, spec.eq, spec.left, spec.right,
                             -spec.scale * (basis.basis(spec.eq).transpose() * g)};
  });
  return terms;
}

ReducedModel assemble_galerkin(const PodBasis& basis, const PhysicalParams& params,
                               const DiffOperators& ops, const GalerkinOptions& options) {
  ReducedModel model(basis.dim());
  for (auto& t : assemble_reduced_linear(basis, params, ops)) model.add(std::move(t));
  for (auto& t : assemble_reduced_quadratic(basis, ops, options)) model.add(std::move(t));
  return model;
}

}  // namespace romswe
