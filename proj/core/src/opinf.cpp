#include "romswe/opinf.hpp"

#include <cmath>
#include <string>

#include "romswe/error.hpp"
#include "romswe/lstsq.hpp"
#include "romswe/parallel.hpp"

namespace romswe {

namespace {

void fill_column(ReducedData& out, Eigen::Index k, const Eigen::VectorXd& z, const Eigen::VectorXd& dz, int r) {
  for (int j = 0; j < 4; ++j) {
    out.states[j].col(k) = z.segment(j * r, r);
    out.derivatives[j].col(k) = dz.segment(j * r, r);
  }
}

ReducedData allocate(int r, Eigen::Index columns, double coriolis) {
  ReducedData out;
  out.coriolis = coriolis;
  for (int j = 0; j < 4; ++j) {
    out.states[j].resize(r, columns);
    out.derivatives[j].resize(r, columns);
  }
  return out;
}

}  // namespace

ReducedData reproject(const SnapshotSet& snapshots, const PodBasis& basis, const PhysicalParams& params,
                      const DiffOperators& ops) {
  if (snapshots.nodes() != basis.nodes()) throw ShapeError("snapshots and basis disagree on N");
  const int r = basis.dim();
  ReducedData out = allocate(r, snapshots.columns(), params.f);
  for (Eigen::Index k = 0; k < snapshots.columns(); ++k) {
    const Eigen::VectorXd z = project(basis, snapshots.state(k));
    const State lifted = lift(basis, z);
    fill_column(out, k, z, project(basis, rhs(lifted, params, ops)), r);
  }
  return out;
}

ReducedData reproject_closed_loop(const State& initial, const PodBasis& basis, const PhysicalParams& params,
                                  const DiffOperators& ops, double dt, int steps, int stride,
                                  const KahanOptions& options) {
  if (stride < 1 || steps < 1) throw InvalidArgument("need steps >= 1 and stride >= 1");
  const int r = basis.dim();
  const Eigen::Index columns = (steps + stride - 1) / stride;
  ReducedData out = allocate(r, columns, params.f);
  KahanStepper stepper(params, ops, options);
  Eigen::VectorXd z = project(basis, initial);
  Eigen::Index col = 0;
  for (int k = 1; k <= steps; ++k) {
    z = project(basis, stepper.step(lift(basis, z), dt));
    if ((k - 1) % stride == 0) fill_column(out, col++, z, project(basis, rhs(lift(basis, z), params, ops)), r);
  }
  return out;
}

ReducedData project_snapshots(const SnapshotSet& snapshots, const PodBasis& basis) {
  if (snapshots.nodes() != basis.nodes()) throw ShapeError("snapshots and basis disagree on N");
  ReducedData out;
  out.coriolis = snapshots.coriolis;
  for (int j = 0; j < 4; ++j) {
    out.states[j] = basis.modes[j].transpose() * snapshots.states[j];
    out.derivatives[j] = basis.modes[j].transpose() * snapshots.derivatives[j];
  }
  return out;
}

Eigen::MatrixXd khatri_rao(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  if (a.cols() != b.cols()) throw ShapeError("Khatri-Rao operands need equal column counts");
  Eigen::MatrixXd out(a.rows() * b.rows(), a.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    out.middleRows(i * b.rows(), b.rows()) = b.array().rowwise() * a.row(i).array();
  return out;
}

namespace {

constexpr int H = 0, U = 1, V = 2, S = 3;

Eigen::Index unknowns(int eq, Eigen::Index r) {
  return (eq == U || eq == V) ? 3 * r * r + r : 2 * r * r;
}

}  // namespace

DataMatrices assemble_data_matrices(std::span<const ReducedData> data) {
  if (data.empty()) throw InvalidArgument("no reduced data to assemble");
  const Eigen::Index r = data.front().states[0].rows();
  Eigen::Index rows = 0;
  for (const auto& d : data) {
    for (int j = 0; j < 4; ++j)
      if (d.states[j].rows() != r || d.derivatives[j].rows() != r || d.states[j].cols() != d.columns() ||
          d.derivatives[j].cols() != d.columns())
        throw ShapeError("inconsistent reduced data blocks");
    rows += d.columns();
  }

  DataMatrices out;
  out.r = static_cast<int>(r);
  for (int j = 0; j < 4; ++j) {
    out.lhs[j].resize(rows, unknowns(j, r));
    out.rhs[j].resize(rows, r);
  }
  const Eigen::Index r2 = r * r;
  Eigen::Index row = 0;
  for (const auto& d : data) {
    const Eigen::Index k = d.columns();
    const auto& w = d.states;
    out.lhs[H].block(row, 0, k, r2) = khatri_rao(w[H], w[U]).transpose();
    out.lhs[H].block(row, r2, k, r2) = khatri_rao(w[H], w[V]).transpose();
    out.lhs[U].block(row, 0, k, r2) = khatri_rao(w[U], w[U]).transpose();
    out.lhs[U].block(row, r2, k, r2) = khatri_rao(w[V], w[U]).transpose();
    out.lhs[U].block(row, 2 * r2, k, r2) = khatri_rao(w[H], w[S]).transpose();
    out.lhs[U].block(row, 3 * r2, k, r) = d.coriolis * w[V].transpose();
    out.lhs[V].block(row, 0, k, r2) = khatri_rao(w[U], w[V]).transpose();
    out.lhs[V].block(row, r2, k, r2) = khatri_rao(w[V], w[V]).transpose();
    out.lhs[V].block(row, 2 * r2, k, r2) = khatri_rao(w[H], w[S]).transpose();
    out.lhs[V].block(row, 3 * r2, k, r) = d.coriolis * w[U].transpose();
    out.lhs[S].block(row, 0, k, r2) = khatri_rao(w[U], w[S]).transpose();
    out.lhs[S].block(row, r2, k, r2) = khatri_rao(w[V], w[S]).transpose();
    for (int j = 0; j < 4; ++j) out.rhs[j].middleRows(row, k) = d.derivatives[j].transpose();
    row += k;
  }
  for (int j = 0; j < 4; ++j)
    if (rows < out.lhs[j].cols())
      out.warnings.push_back(std::string(field_name(kFields[j])) + " equation is underdetermined: " +
                             std::to_string(rows) + " rows for " + std::to_string(out.lhs[j].cols()) +
                             " unknowns");
  return out;
}

ReducedModel model_from_coefficients(int r, const std::array<Eigen::MatrixXd, 4>& x) {
  const Eigen::Index r2 = static_cast<Eigen::Index>(r) * r;
  for (int j = 0; j < 4; ++j)
    if (x[j].rows() != unknowns(j, r) || x[j].cols() != r) throw ShapeError("coefficient block has the wrong shape");
  auto block = [&](int eq, Eigen::Index offset) -> Eigen::MatrixXd {
    return x[eq].middleRows(offset, r2).transpose();
  };
  ReducedModel m(r);
  m.add(QuadraticTerm{"h_hu", Field::h, Field::h, Field::u, block(H, 0)});
  m.add(QuadraticTerm{"h_hv", Field::h, Field::h, Field::v, block(H, r2)});
  m.add(QuadraticTerm{"u_uu", Field::u, Field::u, Field::u, block(U, 0)});
  m.add(QuadraticTerm{"u_vu", Field::u, Field::v, Field::u, block(U, r2)});
  m.add(QuadraticTerm{"u_hs", Field::u, Field::h, Field::s, block(U, 2 * r2)});
  m.add(LinearTerm{"u_coriolis", Field::u, Field::v, x[U].middleRows(3 * r2, r).transpose(), true});
  m.add(QuadraticTerm{"v_uv", Field::v, Field::u, Field::v, block(V, 0)});
  m.add(QuadraticTerm{"v_vv", Field::v, Field::v, Field::v, block(V, r2)});
  m.add(QuadraticTerm{"v_hs", Field::v, Field::h, Field::s, block(V, 2 * r2)});
  m.add(LinearTerm{"v_coriolis", Field::v, Field::u, x[V].middleRows(3 * r2, r).transpose(), true});
  m.add(QuadraticTerm{"s_us", Field::s, Field::u, Field::s, block(S, 0)});
  m.add(QuadraticTerm{"s_vs", Field::s, Field::v, Field::s, block(S, r2)});
  return m;
}

OpInfRom infer_operators(const DataMatrices& matrices, const std::array<double, 4>& tolerances,
                         const InferOptions& options) {
  OpInfRom rom;
  rom.tolerances = tolerances;
  rom.warnings = matrices.warnings;
  std::array<Eigen::MatrixXd, 4> coefficients;
  parallel_for(4, [&](std::size_t j) {
    const LstsqResult res = min_norm_lstsq(matrices.lhs[j], matrices.rhs[j], tolerances[j], options.tol_scale);
    coefficients[j] = res.solution;
    rom.ranks[j] = res.rank;
    rom.residuals[j] = res.residual_norm;
    rom.condition_numbers[j] = options.compute_condition_numbers ? condition_number(matrices.lhs[j]) : 0.0;
  });
  rom.model = model_from_coefficients(matrices.r, coefficients);
  return rom;
}

Eigen::VectorXd coordinate_scales(std::span<const ReducedData> data) {
  if (data.empty()) throw InvalidArgument("no reduced data to scale");
  const Eigen::Index r = data.front().states[0].rows();
  Eigen::VectorXd sum = Eigen::VectorXd::Zero(4 * r);
  Eigen::Index count = 0;
  for (const auto& d : data) {
    for (int j = 0; j < 4; ++j) sum.segment(j * r, r) += d.states[j].rowwise().squaredNorm();
    count += d.columns();
  }
  Eigen::VectorXd scales = (sum / static_cast<double>(std::max<Eigen::Index>(count, 1))).cwiseSqrt();
  for (Eigen::Index i = 0; i < scales.size(); ++i)
    if (!(scales[i] > 0.0)) scales[i] = 1.0;
  return scales;
}

ReducedModel unscale_model(const ReducedModel& scaled, const Eigen::VectorXd& scales, double coriolis_scale) {
  const int r = scaled.dim();
  if (scales.size() != 4 * r) throw ShapeError("need one scale per reduced coordinate");
  auto block = [&](Field f) { return scales.segment(index_of(f) * r, r); };
  ReducedModel out(r);
  for (QuadraticTerm t : scaled.quadratic_terms()) {
    const Eigen::VectorXd a = block(t.left).cwiseInverse(), b = block(t.right).cwiseInverse();
    Eigen::VectorXd kr(static_cast<Eigen::Index>(r) * r);
    for (int i = 0; i < r; ++i) kr.segment(i * r, r) = a[i] * b;
    t.matrix = block(t.eq).asDiagonal() * t.matrix * kr.asDiagonal();
    out.add(std::move(t));
  }
  for (LinearTerm t : scaled.linear_terms()) {
    t.matrix = block(t.eq).asDiagonal() * t.matrix * block(t.source).cwiseInverse().asDiagonal();
    if (t.coriolis) t.matrix /= coriolis_scale;
    out.add(std::move(t));
  }
  return out;
}

ScaledData scale_data(std::span<const ReducedData> data) {
  ScaledData out;
  out.scales = coordinate_scales(data);
  const Eigen::Index r = data.front().states[0].rows();
  double f_sq = 0.0;
  Eigen::Index count = 0;
  for (const auto& d : data) {
    f_sq += d.coriolis * d.coriolis * static_cast<double>(d.columns());
    count += d.columns();
  }
  if (f_sq > 0.0) out.coriolis_scale = std::sqrt(f_sq / static_cast<double>(count));
  out.data.assign(data.begin(), data.end());
  for (auto& d : out.data) {
    d.coriolis /= out.coriolis_scale;
    for (int j = 0; j < 4; ++j) {
      const Eigen::VectorXd inv = out.scales.segment(j * r, r).cwiseInverse();
      d.states[j] = inv.asDiagonal() * d.states[j];
      d.derivatives[j] = inv.asDiagonal() * d.derivatives[j];
    }
  }
  return out;
}

OpInfRom infer_operators(std::span<const ReducedData> data, const std::array<double, 4>& tolerances,
                         const InferOptions& options) {
  if (!options.scale_coordinates) return infer_operators(assemble_data_matrices(data), tolerances, options);
  const ScaledData scaled = scale_data(data);
  OpInfRom rom = infer_operators(assemble_data_matrices(scaled.data), tolerances, options);
  rom.model = unscale_model(rom.model, scaled.scales, scaled.coriolis_scale);
  return rom;
}

}  // namespace romswe
