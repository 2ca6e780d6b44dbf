#pragma once

#include <vector>

#include <Eigen/Core>

#include "romswe/fom.hpp"
#include "romswe/grid.hpp"
#include "romswe/pod.hpp"
#include "romswe/reduced_model.hpp"

namespace romswe {

struct GalerkinOptions {
  /// Upper bound on r^2, the width of every row-wise Kronecker factor.
  Eigen::Index max_kron_width = 10000;
};

/// Row k of the result is kron(a.row(k), b.row(k)), so that
/// rowwise_kron(A, B) (x ⊗ y) = (A x) ∘ (B y).
Eigen::MatrixXd rowwise_kron(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b);

/// Coriolis coupling of the velocity equations (scaled by f at evaluation)
/// and the topography terms, which vanish for b = 0.
std::vector<LinearTerm> assemble_reduced_linear(const PodBasis& basis, const PhysicalParams& params,
                                                const DiffOperators& ops);

/// The twelve reduced quadratic blocks, built from row-wise Kronecker
/// products of basis rows without forming any N x N^2 object. Throws
/// ResourceError when r^2 exceeds the configured cap.
std::vector<QuadraticTerm> assemble_reduced_quadratic(const PodBasis& basis, const DiffOperators& ops,
                                                      const GalerkinOptions& options = {});

/// Intrusive POD-Galerkin model: linear and quadratic terms in one reduced system.
ReducedModel assemble_galerkin(const PodBasis& basis, const PhysicalParams& params,
                               const DiffOperators& ops, const GalerkinOptions& options = {});

}  // namespace romswe
