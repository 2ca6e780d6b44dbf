#pragma once

#include <cstdint>
#include <random>

#include <Eigen/Core>

#include "romswe/fom.hpp"
#include "romswe/grid.hpp"

namespace testing {

inline Eigen::MatrixXd random_matrix(Eigen::Index rows, Eigen::Index cols, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd;
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j)
    for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = nd(rng);
  return m;
}

inline Eigen::VectorXd random_vector(Eigen::Index n, std::uint64_t seed) { return random_matrix(n, 1, seed).col(0); }

/// Random state with positive height and buoyancy, O(1) entries.
inline romswe::State random_state(Eigen::Index nodes, std::uint64_t seed) {
  Eigen::VectorXd w = 0.3 * random_vector(4 * nodes, seed);
  w.segment(0, nodes).array() += 2.0;
  w.segment(3 * nodes, nodes).array() += 1.5;
  return romswe::State(w);
}

inline double rel_diff(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  const double denom = b.norm();
  return denom == 0.0 ? a.norm() : (a - b).norm() / denom;
}

}  // namespace testing
