#include "romswe/snapshots.hpp"

#include <string>

#include "romswe/error.hpp"
#include "romswe/matrix_io.hpp"

namespace romswe {

State SnapshotSet::state(Eigen::Index k) const {
  State w(nodes());
  for (Field f : kFields) w.field(f) = states[index_of(f)].col(k);
  return w;
}

State SnapshotSet::derivative(Eigen::Index k) const {
  State w(nodes());
  for (Field f : kFields) w.field(f) = derivatives[index_of(f)].col(k);
  return w;
}

Eigen::MatrixXd SnapshotSet::stacked_states() const {
  const Eigen::Index n = nodes();
  Eigen::MatrixXd out(4 * n, columns());
  for (int j = 0; j < 4; ++j) out.middleRows(j * n, n) = states[j];
  return out;
}

SnapshotSet collect(const Trajectory& trajectory, const PhysicalParams& params,
                    const DiffOperators& ops, int stride, Eigen::Index last_step) {
  if (stride < 1) throw InvalidArgument("snapshot stride must be >= 1");
  const Eigen::Index steps = trajectory.steps();
  if (steps < 1) throw InvalidArgument("cannot collect snapshots from an empty trajectory");
  if (last_step < 0) last_step = steps;
  if (last_step < 1 || last_step > steps)
    throw InvalidArgument("last_step " + std::to_string(last_step) + " outside [1, " +
                          std::to_string(steps) + "]");

  const Eigen::Index n = trajectory.nodes();
  const Eigen::Index cols = (last_step + stride - 1) / stride;
  SnapshotSet set;
  for (int j = 0; j < 4; ++j) {
    set.states[j].resize(n, cols);
    set.derivatives[j].resize(n, cols);
  }
  for (Eigen::Index c = 0; c < cols; ++c) {
    const State w = trajectory.state(1 + c * stride);
    const State dw = rhs(w, params, ops);
    for (int j = 0; j < 4; ++j) {
      set.states[j].col(c) = w.field(kFields[j]);
      set.derivatives[j].col(c) = dw.field(kFields[j]);
    }
  }
  set.initial = trajectory.states.col(0);
  set.coriolis = params.f;
  set.latitude = params.latitude;
  set.dt = trajectory.dt;
  set.stride = stride;
  return set;
}

GlobalSnapshots concatenate(std::span<const SnapshotSet> sets) {
  if (sets.empty()) throw InvalidArgument("concatenate needs at least one snapshot set");
  const Eigen::Index n = sets.front().nodes();
  Eigen::Index total = 0;
  for (const auto& s : sets) {
    if (s.nodes() != n) throw ShapeError("snapshot sets have different node counts");
    total += s.columns();
  }
  GlobalSnapshots g;
  for (int j = 0; j < 4; ++j) g.states[j].resize(n, total);
  Eigen::Index offset = 0;
  for (const auto& s : sets) {
    for (int j = 0; j < 4; ++j) g.states[j].middleCols(offset, s.columns()) = s.states[j];
    offset += s.columns();
    g.coriolis.push_back(s.coriolis);
    g.widths.push_back(s.columns());
  }
  return g;
}

void save_snapshots(const SnapshotSet& set, const std::filesystem::path& path) {
  MatrixBundle b;
  b.set("kind", std::string("snapshot-set"));
  b.set("nodes", static_cast<long long>(set.nodes()));
  b.set("columns", static_cast<long long>(set.columns()));
  b.set("stride", static_cast<long long>(set.stride));
  b.set("dt", set.dt);
  b.set("coriolis", set.coriolis);
  if (set.latitude) b.set("latitude", *set.latitude);
  for (Field f : kFields) b.add("W_" + std::string(field_name(f)), set.states[index_of(f)]);
  for (Field f : kFields) b.add("dW_" + std::string(field_name(f)), set.derivatives[index_of(f)]);
  b.add("initial", set.initial);
  save_bundle(b, path);
}

SnapshotSet load_snapshots(const std::filesystem::path& path) {
  const MatrixBundle b = load_bundle(path);
  if (b.get("kind") != "snapshot-set")
    throw LoadError(LoadErrorKind::corrupt_header, path.string() + " is not a snapshot set");
  const long long n = b.get_int("nodes");
  const long long k = b.get_int("columns");
  SnapshotSet set;
  for (Field f : kFields) {
    const std::string name(field_name(f));
    set.states[index_of(f)] = b.matrix("W_" + name);
    set.derivatives[index_of(f)] = b.matrix("dW_" + name);
    for (const Eigen::MatrixXd* m : {&set.states[index_of(f)], &set.derivatives[index_of(f)]})
      if (m->rows() != n || m->cols() != k)
        throw LoadError(LoadErrorKind::dimension_mismatch,
                        "matrix for field " + name + " is " + std::to_string(m->rows()) + "x" +
                            std::to_string(m->cols()) + ", header says " + std::to_string(n) + "x" +
                            std::to_string(k));
  }
  const Eigen::MatrixXd& initial = b.matrix("initial");
  if (initial.rows() != 4 * n || initial.cols() != 1)
    throw LoadError(LoadErrorKind::dimension_mismatch, "initial state has the wrong shape");
  set.initial = initial.col(0);
  set.stride = static_cast<int>(b.get_int("stride"));
  set.dt = b.get_double("dt");
  set.coriolis = b.get_double("coriolis");
  if (b.meta.count("latitude")) set.latitude = b.get_double("latitude");
  return set;
}

}  // namespace romswe
