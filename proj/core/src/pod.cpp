#include "romswe/pod.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <string>

#include <Eigen/QR>
#include <Eigen/SVD>

#include "romswe/error.hpp"
#include "romswe/matrix_io.hpp"
#include "romswe/parallel.hpp"

namespace romswe {

namespace {

Eigen::MatrixXd orthonormal_columns(const Eigen::MatrixXd& a) {
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(a);
  return qr.householderQ() * Eigen::MatrixXd::Identity(a.rows(), a.cols());
}

Eigen::Index numerical_rank(const Eigen::VectorXd& sigma, Eigen::Index rows, Eigen::Index cols) {
  if (sigma.size() == 0 || sigma[0] == 0.0) return 0;
  const double tol = static_cast<double>(std::max(rows, cols)) *
                     std::numeric_limits<double>::epsilon() * sigma[0];
  return (sigma.array() > tol).count();
}

}  // namespace

void normalize_signs(Eigen::MatrixXd& modes) {
  for (Eigen::Index j = 0; j < modes.cols(); ++j) {
    Eigen::Index imax = 0;
    modes.col(j).cwiseAbs().maxCoeff(&imax);
    if (modes(imax, j) < 0.0) modes.col(j) *= -1.0;
  }
}

SvdResult truncated_svd(const Eigen::MatrixXd& matrix, int r) {
  const Eigen::Index limit = std::min(matrix.rows(), matrix.cols());
  if (r < 1 || r > limit)
    throw InvalidArgument("POD dimension r=" + std::to_string(r) + " outside [1, " +
                          std::to_string(limit) + "]");
  Eigen::BDCSVD<Eigen::MatrixXd> svd(matrix, Eigen::ComputeThinU);
  SvdResult out;
  out.left = svd.matrixU().leftCols(r);
  out.singular_values = svd.singularValues();
  normalize_signs(out.left);
  const Eigen::Index rank = numerical_rank(out.singular_values, matrix.rows(), matrix.cols());
  if (rank < r)
    out.warnings.push_back("requested r=" + std::to_string(r) +
                           " exceeds the numerical rank; effective rank is " + std::to_string(rank));
  return out;
}

SvdResult randomized_svd(const Eigen::MatrixXd& matrix, int r, int oversampling,
                         int power_iterations, std::uint64_t seed) {
  const Eigen::Index m = matrix.rows(), n = matrix.cols();
  if (r < 1 || oversampling < 0 || power_iterations < 0)
    throw InvalidArgument("randomized_svd needs r >= 1, p >= 0, q >= 0");
  const Eigen::Index k = r + oversampling;
  if (k > std::min(m, n))
    throw InvalidArgument("r + p = " + std::to_string(k) + " exceeds min(rows, cols) = " +
                          std::to_string(std::min(m, n)));

  SvdResult out;
  if (matrix.cwiseAbs().maxCoeff() == 0.0) {
    out.left = Eigen::MatrixXd::Zero(m, r);
    out.singular_values = Eigen::VectorXd::Zero(k);
    out.warnings.push_back("randomized_svd: matrix is identically zero, returning a zero basis");
    return out;
  }

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::MatrixXd omega(n, k);
  for (Eigen::Index j = 0; j < k; ++j)
    for (Eigen::Index i = 0; i < n; ++i) omega(i, j) = normal(rng);

  Eigen::MatrixXd q = orthonormal_columns(matrix * omega);
  for (int it = 0; it < power_iterations; ++it) {
    const Eigen::MatrixXd z = orthonormal_columns(matrix.transpose() * q);
    q = orthonormal_columns(matrix * z);
  }
  const Eigen::MatrixXd small = q.transpose() * matrix;
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(small, Eigen::ComputeThinU);
  out.left = q * svd.matrixU().leftCols(r);
  out.singular_values = svd.singularValues();
  normalize_signs(out.left);
  const Eigen::Index rank = numerical_rank(out.singular_values, m, n);
  if (rank < r)
    out.warnings.push_back("requested r=" + std::to_string(r) +
                           " exceeds the numerical rank; effective rank is " + std::to_string(rank));
  return out;
}

PodBasis pod_basis(const GlobalSnapshots& global, int r, const PodOptions& options) {
  PodBasis basis;
  std::array<SvdResult, 4> results;
  parallel_for(4, [&](std::size_t j) {
    const Eigen::MatrixXd& w = global.states[j];
    results[j] = options.method == SvdMethod::deterministic
                     ? truncated_svd(w, r)
                     : randomized_svd(w, r, options.oversampling, options.power_iterations,
                                      options.seed + j);
  });
  for (int j = 0; j < 4; ++j) {
    basis.modes[j] = std::move(results[j].left);
    basis.singular_values[j] = std::move(results[j].singular_values);
    basis.effective_rank[j] =
        std::min<Eigen::Index>(r, numerical_rank(basis.singular_values[j], global.nodes(), global.columns()));
    for (auto& msg : results[j].warnings)
      basis.warnings.push_back(std::string(field_name(kFields[j])) + ": " + msg);
  }
  return basis;
}

Eigen::VectorXd project(const PodBasis& basis, const State& w) {
  if (w.nodes() != basis.nodes()) throw ShapeError("state and basis node counts differ");
  const int r = basis.dim();
  Eigen::VectorXd z(4 * r);
  for (int j = 0; j < 4; ++j) z.segment(j * r, r) = basis.modes[j].transpose() * w.field(kFields[j]);
  return z;
}

State lift(const PodBasis& basis, const Eigen::VectorXd& z) {
  const int r = basis.dim();
  if (z.size() != 4 * r) throw ShapeError("reduced state must have 4r entries");
  State w(basis.nodes());
  for (int j = 0; j < 4; ++j) w.field(kFields[j]) = basis.modes[j] * z.segment(j * r, r);
  return w;
}

Eigen::MatrixXd project_columns(const PodBasis& basis, const Eigen::MatrixXd& stacked) {
  const Eigen::Index n = basis.nodes();
  const int r = basis.dim();
  if (stacked.rows() != 4 * n) throw ShapeError("stacked matrix must have 4N rows");
  Eigen::MatrixXd out(4 * r, stacked.cols());
  for (int j = 0; j < 4; ++j)
    out.middleRows(j * r, r) = basis.modes[j].transpose() * stacked.middleRows(j * n, n);
  return out;
}

Eigen::MatrixXd lift_columns(const PodBasis& basis, const Eigen::MatrixXd& reduced) {
  const Eigen::Index n = basis.nodes();
  const int r = basis.dim();
  if (reduced.rows() != 4 * r) throw ShapeError("reduced matrix must have 4r rows");
  Eigen::MatrixXd out(4 * n, reduced.cols());
  for (int j = 0; j < 4; ++j) out.middleRows(j * n, n) = basis.modes[j] * reduced.middleRows(j * r, r);
  return out;
}

void save_basis(const PodBasis& basis, const std::filesystem::path& path) {
  MatrixBundle b;
  b.set("kind", std::string("pod-basis"));
  b.set("r", static_cast<long long>(basis.dim()));
  b.set("nodes", static_cast<long long>(basis.nodes()));
  for (Field f : kFields) {
    const std::string name(field_name(f));
    b.add("Phi_" + name, basis.modes[index_of(f)]);
    b.add("sigma_" + name, basis.singular_values[index_of(f)]);
  }
  save_bundle(b, path);
}

PodBasis load_basis(const std::filesystem::path& path) {
  const MatrixBundle b = load_bundle(path);
  if (b.get("kind") != "pod-basis")
    throw LoadError(LoadErrorKind::corrupt_header, path.string() + " is not a POD basis");
  const long long r = b.get_int("r"), n = b.get_int("nodes");
  PodBasis basis;
  for (Field f : kFields) {
    const std::string name(field_name(f));
    const Eigen::MatrixXd& phi = b.matrix("Phi_" + name);
    const Eigen::MatrixXd& sigma = b.matrix("sigma_" + name);
    if (phi.rows() != n || phi.cols() != r || sigma.cols() != 1)
      throw LoadError(LoadErrorKind::dimension_mismatch, "basis block " + name + " has the wrong shape");
    basis.modes[index_of(f)] = phi;
    basis.singular_values[index_of(f)] = sigma.col(0);
    basis.effective_rank[index_of(f)] = r;
  }
  return basis;
}

}  // namespace romswe
