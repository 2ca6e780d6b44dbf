#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "romswe/fom.hpp"
#include "romswe/snapshots.hpp"

namespace romswe {

enum class SvdMethod { deterministic, randomized };

struct PodOptions {
  SvdMethod method = SvdMethod::deterministic;
  int oversampling = 10;
  int power_iterations = 2;
  std::uint64_t seed = 0;
};

/// Leading left singular vectors and singular values of one matrix.
struct SvdResult {
  Eigen::MatrixXd left;
  Eigen::VectorXd singular_values;
  std::vector<std::string> warnings;
};

/// Thin deterministic SVD truncated to r columns. `singular_values` holds the
/// whole spectrum.
SvdResult truncated_svd(const Eigen::MatrixXd& matrix, int r);

/// Randomized range finder with a seeded Gaussian test matrix, q subspace
/// power iterations, and an SVD of the small projected matrix.
SvdResult randomized_svd(const Eigen::MatrixXd& matrix, int r, int oversampling = 10,
                         int power_iterations = 2, std::uint64_t seed = 0);

/// Separate orthonormal bases for h, u, v and s, with equal dimension r.
struct PodBasis {
  std::array<Eigen::MatrixXd, 4> modes;
  std::array<Eigen::VectorXd, 4> singular_values;
  std::array<Eigen::Index, 4> effective_rank{};
  std::vector<std::string> warnings;

  int dim() const { return static_cast<int>(modes[0].cols()); }
  Eigen::Index nodes() const { return modes[0].rows(); }
  const Eigen::MatrixXd& basis(Field f) const { return modes[index_of(f)]; }
};

PodBasis pod_basis(const GlobalSnapshots& global, int r, const PodOptions& options = {});

/// Flips each column so its largest-magnitude entry is positive.
void normalize_signs(Eigen::MatrixXd& modes);

/// Blockwise Phi_j^T w_j, giving 4r reduced coordinates (h~, u~, v~, s~).
Eigen::VectorXd project(const PodBasis& basis, const State& w);
/// Blockwise Phi_j z_j.
State lift(const PodBasis& basis, const Eigen::VectorXd& z);
/// Column-wise project/lift of stacked 4N x K and 4r x K matrices.
Eigen::MatrixXd project_columns(const PodBasis& basis, const Eigen::MatrixXd& stacked);
Eigen::MatrixXd lift_columns(const PodBasis& basis, const Eigen::MatrixXd& reduced);

void save_basis(const PodBasis& basis, const std::filesystem::path& path);
PodBasis load_basis(const std::filesystem::path& path);

}  // namespace romswe
