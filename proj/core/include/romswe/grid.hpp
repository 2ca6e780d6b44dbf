#pragma once

#include <Eigen/Core>
#include <Eigen/SparseCore>

namespace romswe {

using SparseMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;

/// Uniform periodic mesh on [a,b] x [c,d] with n nodes per axis.
///
/// The duplicate periodic nodes on the right and top edges are not stored, so
/// the grid carries N = n^2 nodes. Node (i, j) (x index i, y index j, both
/// zero-based) lives at flat index i*n + j: y runs fastest, x slowest.
class Grid {
public:
  Grid(int n, double a, double b, double c, double d);

  /// Square domain [0, length]^2.
  static Grid square(int n, double length) { return Grid(n, 0.0, length, 0.0, length); }

  int n() const { return n_; }
  Eigen::Index size() const { return static_cast<Eigen::Index>(n_) * n_; }
  double a() const { return a_; }
  double b() const { return b_; }
  double c() const { return c_; }
  double d() const { return d_; }
  double dx() const { return dx_; }
  double dy() const { return dy_; }
  double cell_area() const { return dx_ * dy_; }

  double x(int i) const { return a_ + i * dx_; }
  double y(int j) const { return c_ + j * dy_; }
  Eigen::Index index(int i, int j) const { return static_cast<Eigen::Index>(i) * n_ + j; }

  /// Samples f(x, y) at every node in flat ordering.
  template <typename F>
  Eigen::VectorXd sample(F&& f) const {
    Eigen::VectorXd out(size());
    for (int i = 0; i < n_; ++i)
      for (int j = 0; j < n_; ++j) out[index(i, j)] = f(x(i), y(j));
    return out;
  }

private:
  int n_;
  double a_, b_, c_, d_;
  double dx_, dy_;
};

/// Centered periodic first-derivative matrices on a Grid.
struct DiffOperators {
  SparseMatrix dx;
  SparseMatrix dy;
};

/// (1/2 delta) times the periodic circulant with +1 on the super- and -1 on
/// the sub-diagonal. Throws InvalidGrid for n < 3 or delta <= 0.
SparseMatrix build_periodic_diff_1d(int n, double delta);

/// Dx = (1/2dx) D_n (x) I_n and Dy = (1/2dy) I_n (x) D_n.
DiffOperators build_diff_2d(const Grid& grid);

/// Kronecker product of two sparse matrices.
SparseMatrix kron(const SparseMatrix& a, const SparseMatrix& b);

}  // namespace romswe
