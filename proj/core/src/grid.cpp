#include "romswe/grid.hpp"

#include <string>
#include <vector>

#include "romswe/error.hpp"

namespace romswe {

Grid::Grid(int n, double a, double b, double c, double d)
    : n_(n), a_(a), b_(b), c_(c), d_(d), dx_(0.0), dy_(0.0) {
  // n = 2 collapses the centered stencil (i+1 == i-1), which breaks the
  // two-nonzeros-per-row structure every downstream operator relies on.
  if (n < 3) throw InvalidGrid("grid needs at least 3 points per axis, got " + std::to_string(n));
  if (!(b > a) || !(d > c)) throw InvalidGrid("grid bounds must satisfy a < b and c < d");
  dx_ = (b - a) / n;
  dy_ = (d - c) / n;
}

SparseMatrix build_periodic_diff_1d(int n, double delta) {
  if (n < 3) throw InvalidGrid("periodic stencil needs n >= 3, got " + std::to_string(n));
  if (!(delta > 0.0)) throw InvalidGrid("mesh size must be positive");
  const double w = 1.0 / (2.0 * delta);
  std::vector<Eigen::Triplet<double>> t;
  t.reserve(2 * static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    t.emplace_back(i, (i + 1) % n, w);
    t.emplace_back(i, (i + n - 1) % n, -w);
  }
  SparseMatrix m(n, n);
  m.setFromTriplets(t.begin(), t.end());
  return m;
}

SparseMatrix kron(const SparseMatrix& a, const SparseMatrix& b) {
  SparseMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
  std::vector<Eigen::Triplet<double>> t;
  t.reserve(static_cast<std::size_t>(a.nonZeros() * b.nonZeros()));
  for (Eigen::Index ra = 0; ra < a.outerSize(); ++ra)
    for (SparseMatrix::InnerIterator ia(a, ra); ia; ++ia)
      for (Eigen::Index rb = 0; rb < b.outerSize(); ++rb)
        for (SparseMatrix::InnerIterator ib(b, rb); ib; ++ib)
          t.emplace_back(ia.row() * b.rows() + ib.row(), ia.col() * b.cols() + ib.col(),
                         ia.value() * ib.value());
  out.setFromTriplets(t.begin(), t.end());
  return out;
}

DiffOperators build_diff_2d(const Grid& grid) {
  const int n = grid.n();
  SparseMatrix eye(n, n);
  eye.setIdentity();
  // build_periodic_diff_1d already carries the 1/(2 delta) factor.
  return {kron(build_periodic_diff_1d(n, grid.dx()), eye),
          kron(eye, build_periodic_diff_1d(n, grid.dy()))};
}

}  // namespace romswe
