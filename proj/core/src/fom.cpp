#include "romswe/fom.hpp"

#include <cmath>
#include <string>
#include <utility>

#include <Eigen/IterativeLinearSolvers>
#include <Eigen/SparseLU>
#ifdef ROMSWE_HAVE_UMFPACK
#include <Eigen/UmfPackSupport>
#endif

#include "romswe/error.hpp"

namespace romswe {

std::string_view field_name(Field f) {
  switch (f) {
    case Field::h: return "h";
    case Field::u: return "u";
    case Field::v: return "v";
    case Field::s: return "s";
  }
  return "?";
}

State::State(Eigen::VectorXd stacked) : w_(std::move(stacked)), nodes_(w_.size() / 4) {
  if (w_.size() % 4 != 0)
    throw ShapeError("stacked state length " + std::to_string(w_.size()) + " is not a multiple of 4");
}

State State::from_fields(const Eigen::VectorXd& h, const Eigen::VectorXd& u,
                         const Eigen::VectorXd& v, const Eigen::VectorXd& s) {
  const Eigen::Index n = h.size();
  if (u.size() != n || v.size() != n || s.size() != n)
    throw ShapeError("state fields must have identical lengths");
  State w(n);
  w.h() = h;
  w.u() = u;
  w.v() = v;
  w.s() = s;
  return w;
}

double coriolis_from_latitude(double mu) { return 2.0 * kEarthRotationRate * std::sin(mu); }

PhysicalParams PhysicalParams::with_coriolis(double f, double g) {
  PhysicalParams p;
  p.f = f;
  p.g = g;
  return p;
}

PhysicalParams PhysicalParams::at_latitude(double mu, double g) {
  PhysicalParams p;
  p.f = coriolis_from_latitude(mu);
  p.g = g;
  p.latitude = mu;
  return p;
}

namespace {

void check_shapes(const State& w, const PhysicalParams& params, const DiffOperators& ops) {
  const Eigen::Index n = w.nodes();
  if (ops.dx.rows() != n || ops.dx.cols() != n || ops.dy.rows() != n || ops.dy.cols() != n)
    throw ShapeError("state has " + std::to_string(n) + " nodes but operators are " +
                     std::to_string(ops.dx.rows()) + "x" + std::to_string(ops.dx.cols()));
  if (params.has_topography() && params.topography.size() != n)
    throw ShapeError("topography length does not match the state");
}

Eigen::VectorXd topography_or_zero(const PhysicalParams& params, Eigen::Index n) {
  return params.has_topography() ? params.topography : Eigen::VectorXd::Zero(n);
}

// Emits every entry of F'(w), scaled by `scale`, as (row, col, value). The set
// and order of emitted positions depends only on the operators, never on the
// state values, so repeated assemblies share one sparsity pattern.
template <typename Emit>
void emit_jacobian(const State& w, const PhysicalParams& params, const DiffOperators& ops,
                   double scale, Emit&& emit) {
  const Eigen::Index n = w.nodes();
  const auto h = w.h();
  const auto u = w.u();
  const auto v = w.v();
  const auto s = w.s();
  const Eigen::VectorXd b = topography_or_zero(params, n);

  const Eigen::VectorXd dxu = ops.dx * u, dyu = ops.dy * u;
  const Eigen::VectorXd dxv = ops.dx * v, dyv = ops.dy * v;
  const Eigen::VectorXd dxs = ops.dx * s, dys = ops.dy * s;
  const Eigen::VectorXd dxh = ops.dx * h, dyh = ops.dy * h;
  const Eigen::VectorXd dxb = ops.dx * b, dyb = ops.dy * b;

  constexpr int H = 0, U = 1, V = 2, S = 3;

  // diag(d) in block (bi, bj)
  auto diag = [&](int bi, int bj, auto&& d, double c) {
    for (Eigen::Index r = 0; r < n; ++r) emit(bi * n + r, bj * n + r, scale * c * d[r]);
  };
  // diag(a) * D
  auto left = [&](int bi, int bj, const SparseMatrix& d, auto&& a, double c) {
    for (Eigen::Index r = 0; r < n; ++r)
      for (SparseMatrix::InnerIterator it(d, r); it; ++it)
        emit(bi * n + r, bj * n + it.col(), scale * c * a[r] * it.value());
  };
  // D * diag(a)
  auto right = [&](int bi, int bj, const SparseMatrix& d, auto&& a, double c) {
    for (Eigen::Index r = 0; r < n; ++r)
      for (SparseMatrix::InnerIterator it(d, r); it; ++it)
        emit(bi * n + r, bj * n + it.col(), scale * c * it.value() * a[it.col()]);
  };
  const Eigen::VectorXd ones = Eigen::VectorXd::Ones(n);

  // dh/dt = -Dx(u h) - Dy(v h)
  right(H, H, ops.dx, u, -1.0);
  right(H, H, ops.dy, v, -1.0);
  right(H, U, ops.dx, h, -1.0);
  right(H, V, ops.dy, h, -1.0);

  // du/dt = -u Dx u - v Dy u - h/2 Dx s - s Dx h - s Dx b + f v
  left(U, H, ops.dx, s, -1.0);
  diag(U, H, dxs, -0.5);
  diag(U, U, dxu, -1.0);
  left(U, U, ops.dx, u, -1.0);
  left(U, U, ops.dy, v, -1.0);
  diag(U, V, dyu, -1.0);
  diag(U, V, ones, params.f);
  left(U, S, ops.dx, h, -0.5);
  diag(U, S, dxh, -1.0);
  diag(U, S, dxb, -1.0);

  // dv/dt = -u Dx v - v Dy v - h/2 Dy s - s Dy h - s Dy b - f u
  left(V, H, ops.dy, s, -1.0);
  diag(V, H, dys, -0.5);
  diag(V, U, dxv, -1.0);
  diag(V, U, ones, -params.f);
  left(V, V, ops.dx, u, -1.0);
  left(V, V, ops.dy, v, -1.0);
  diag(V, V, dyv, -1.0);
  left(V, S, ops.dy, h, -0.5);
  diag(V, S, dyh, -1.0);
  diag(V, S, dyb, -1.0);

  // ds/dt = -u Dx s - v Dy s
  diag(S, U, dxs, -1.0);
  diag(S, V, dys, -1.0);
  left(S, S, ops.dx, u, -1.0);
  left(S, S, ops.dy, v, -1.0);
}

}  // namespace

State rhs(const State& w, const PhysicalParams& params, const DiffOperators& ops) {
  check_shapes(w, params, ops);
  const Eigen::Index n = w.nodes();
  const auto h = w.h();
  const auto u = w.u();
  const auto v = w.v();
  const auto s = w.s();

  State out(n);
  out.h() = -(ops.dx * u.cwiseProduct(h)) - ops.dy * v.cwiseProduct(h);

  const Eigen::VectorXd dxs = ops.dx * s, dys = ops.dy * s;
  const Eigen::VectorXd dxh = ops.dx * h, dyh = ops.dy * h;
  const Eigen::VectorXd dxu = ops.dx * u, dyu = ops.dy * u;
  const Eigen::VectorXd dxv = ops.dx * v, dyv = ops.dy * v;

  out.u() = -u.cwiseProduct(dxu) - v.cwiseProduct(dyu) - 0.5 * h.cwiseProduct(dxs) -
            s.cwiseProduct(dxh) + params.f * v;
  out.v() = -u.cwiseProduct(dxv) - v.cwiseProduct(dyv) - 0.5 * h.cwiseProduct(dys) -
            s.cwiseProduct(dyh) - params.f * u;
  if (params.has_topography()) {
    out.u() -= s.cwiseProduct(ops.dx * params.topography);
    out.v() -= s.cwiseProduct(ops.dy * params.topography);
  }
  out.s() = -u.cwiseProduct(dxs) - v.cwiseProduct(dys);
  return out;
}

SparseMatrix jacobian(const State& w, const PhysicalParams& params, const DiffOperators& ops) {
  check_shapes(w, params, ops);
  const Eigen::Index dim = w.stacked().size();
  std::vector<Eigen::Triplet<double>> t;
  t.reserve(static_cast<std::size_t>(40 * w.nodes()));
  emit_jacobian(w, params, ops, 1.0, [&](Eigen::Index r, Eigen::Index c, double val) {
    t.emplace_back(static_cast<int>(r), static_cast<int>(c), val);
  });
  SparseMatrix j(dim, dim);
  j.setFromTriplets(t.begin(), t.end());
  return j;
}

struct KahanStepper::Impl {
  using ColMatrix = Eigen::SparseMatrix<double, Eigen::ColMajor, int>;
  std::vector<Eigen::Triplet<double>> triplets;
  ColMatrix system;
#ifdef ROMSWE_HAVE_UMFPACK
  Eigen::UmfPackLU<ColMatrix> lu;
#else
  Eigen::SparseLU<ColMatrix, Eigen::COLAMDOrdering<int>> lu;
#endif
  Eigen::BiCGSTAB<ColMatrix, Eigen::DiagonalPreconditioner<double>> bicg;
  bool analyzed = false;
};

KahanStepper::KahanStepper(PhysicalParams params, const DiffOperators& ops, KahanOptions options)
    : params_(std::move(params)), ops_(&ops), options_(options), impl_(std::make_unique<Impl>()) {}

KahanStepper::~KahanStepper() = default;
KahanStepper::KahanStepper(KahanStepper&&) noexcept = default;
KahanStepper& KahanStepper::operator=(KahanStepper&&) noexcept = default;

State KahanStepper::step(const State& w, double dt) {
  if (!(dt > 0.0)) throw InvalidArgument("time step must be positive");
  check_shapes(w, params_, *ops_);
  const Eigen::Index dim = w.stacked().size();
  auto& im = *impl_;

  im.triplets.clear();
  im.triplets.reserve(static_cast<std::size_t>(44 * w.nodes()));
  for (Eigen::Index i = 0; i < dim; ++i) im.triplets.emplace_back(int(i), int(i), 1.0);
  emit_jacobian(w, params_, *ops_, -0.5 * dt, [&](Eigen::Index r, Eigen::Index c, double val) {
    im.triplets.emplace_back(static_cast<int>(r), static_cast<int>(c), val);
  });
  im.system.resize(dim, dim);
  im.system.setFromTriplets(im.triplets.begin(), im.triplets.end());

  const Eigen::VectorXd load = dt * rhs(w, params_, *ops_).stacked();
  Eigen::VectorXd delta;

  const bool direct = options_.solver == LinearSolver::sparse_lu ||
                      (options_.solver == LinearSolver::automatic && dim <= options_.direct_size_limit);
  if (direct) {
    if (!im.analyzed) {
      im.lu.analyzePattern(im.system);
      im.analyzed = true;
    }
    im.lu.factorize(im.system);
    if (im.lu.info() != Eigen::Success)
      throw SolveError("sparse LU factorization of I - dt/2 J failed");
    delta = im.lu.solve(load);
  } else {
    im.bicg.setTolerance(options_.iterative_tolerance);
    im.bicg.setMaxIterations(options_.max_iterations);
    im.bicg.compute(im.system);
    delta = im.bicg.solveWithGuess(load, load);
    if (im.bicg.info() != Eigen::Success)
      throw SolveError("BiCGSTAB did not reach relative residual " +
                       std::to_string(options_.iterative_tolerance) + " (estimated error " +
                       std::to_string(im.bicg.error()) + ")");
  }

  const double load_norm = load.norm();
  const double residual = (im.system * delta - load).norm();
  if (!delta.allFinite() || (load_norm > 0.0 && residual > 1e-8 * load_norm))
    throw SolveError("Kahan system is singular or nearly so: relative residual " +
                     std::to_string(load_norm > 0.0 ? residual / load_norm : residual));

  return State(Eigen::VectorXd(w.stacked() + delta));
}

State kahan_step(const State& w, double dt, const PhysicalParams& params, const DiffOperators& ops) {
  KahanStepper stepper(params, ops);
  return stepper.step(w, dt);
}

Trajectory simulate(const State& initial, double dt, int steps, const PhysicalParams& params,
                    const DiffOperators& ops, const KahanOptions& options) {
  if (steps < 1) throw InvalidArgument("simulate needs at least one step");
  Trajectory traj;
  traj.dt = dt;
  traj.states.resize(initial.stacked().size(), steps + 1);
  traj.states.col(0) = initial.stacked();
  KahanStepper stepper(params, ops, options);
  State w = initial;
  for (int k = 0; k < steps; ++k) {
    try {
      w = stepper.step(w, dt);
    } catch (const SolveError& e) {
      throw SolveError(std::string(e.what()) + " (step " + std::to_string(k + 1) + ")", k + 1,
                       e.rcond());
    }
    traj.states.col(k + 1) = w.stacked();
  }
  return traj;
}

ConservedQuantities conserved_quantities(const State& w, const PhysicalParams& params,
                                         const Grid& grid) {
  const int n = grid.n();
  if (w.nodes() != grid.size()) throw ShapeError("state does not match grid");
  const Eigen::VectorXd b = topography_or_zero(params, w.nodes());
  const auto h = w.h();
  const auto u = w.u();
  const auto v = w.v();
  const auto s = w.s();
  const double area = grid.cell_area();

  ConservedQuantities q;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const Eigen::Index k = grid.index(i, j);
      q.energy += 0.5 * h[k] * h[k] * s[k] + h[k] * s[k] * b[k] +
                  h[k] * 0.5 * (u[k] * u[k] + v[k] * v[k]);
      q.mass += h[k];
      q.buoyancy += h[k] * s[k];
      const double dvdx =
          (v[grid.index((i + 1) % n, j)] - v[grid.index((i + n - 1) % n, j)]) / (2.0 * grid.dx());
      const double dudy =
          (u[grid.index(i, (j + 1) % n)] - u[grid.index(i, (j + n - 1) % n)]) / (2.0 * grid.dy());
      q.vorticity += dvdx - dudy + params.f;
    }
  }
  q.energy *= area;
  q.mass *= area;
  q.vorticity *= area;
  q.buoyancy *= area;
  return q;
}

std::vector<ConservedQuantities> invariant_series(const Trajectory& trajectory,
                                                  const PhysicalParams& params, const Grid& grid) {
  std::vector<ConservedQuantities> out;
  out.reserve(static_cast<std::size_t>(trajectory.states.cols()));
  for (Eigen::Index k = 0; k < trajectory.states.cols(); ++k)
    out.push_back(conserved_quantities(trajectory.state(k), params, grid));
  return out;
}

DoubleVortexScenario DoubleVortexScenario::with_length(double length) {
  DoubleVortexScenario sc;
  sc.length = length;
  sc.sigma_x = 3.0 * length / 40.0;
  sc.sigma_y = 3.0 * length / 40.0;
  return sc;
}

State double_vortex_initial(const Grid& grid, const PhysicalParams& params,
                            const DoubleVortexScenario& sc) {
  const double L = sc.length;
  if (std::abs(grid.a()) > 1e-9 * L || std::abs(grid.c()) > 1e-9 * L ||
      std::abs(grid.b() - L) > 1e-9 * L || std::abs(grid.d() - L) > 1e-9 * L)
    throw InvalidArgument("double-vortex scenario requires a grid spanning [0, L]^2");
  if (params.f == 0.0)
    throw InvalidArgument("double-vortex velocities are undefined for f = 0 (geostrophic balance)");

  const double pi = std::acos(-1.0);
  const double g = params.g;
  const double xc = 0.5 * L;
  const double xc1 = (0.5 - sc.offset_x) * L, xc2 = (0.5 + sc.offset_x) * L;
  const double yc1 = (0.5 - sc.offset_y) * L, yc2 = (0.5 + sc.offset_y) * L;
  const double sx = sc.sigma_x, sy = sc.sigma_y;

  auto xp = [&](double x, double c) { return L / (pi * sx) * std::sin(pi / L * (x - c)); };
  auto yp = [&](double y, double c) { return L / (pi * sy) * std::sin(pi / L * (y - c)); };
  auto xpp = [&](double x, double c) { return L / (2 * pi * sx) * std::sin(2 * pi / L * (x - c)); };
  auto ypp = [&](double y, double c) { return L / (2 * pi * sy) * std::sin(2 * pi / L * (y - c)); };
  auto bump = [&](double x, double y, double cx, double cy) {
    const double a = xp(x, cx), b = yp(y, cy);
    return std::exp(-0.5 * (a * a + b * b));
  };

  const double correction = 4.0 * pi * sx * sy / (L * L);
  State w(grid.size());
  w.h() = grid.sample([&](double x, double y) {
    return sc.mean_height -
           sc.height_amplitude * (bump(x, y, xc1, yc1) + bump(x, y, xc2, yc2) - correction);
  });
  w.u() = grid.sample([&](double x, double y) {
    return -g * sc.height_amplitude / (params.f * sy) *
           (ypp(y, yc1) * bump(x, y, xc1, yc1) + ypp(y, yc2) * bump(x, y, xc2, yc2));
  });
  w.v() = grid.sample([&](double x, double y) {
    return g * sc.height_amplitude / (params.f * sx) *
           (xpp(x, xc1) * bump(x, y, xc1, yc1) + xpp(x, xc2) * bump(x, y, xc2, yc2));
  });
  w.s() = grid.sample([&](double x, double) { return g * (1.0 + 0.05 * std::sin(2 * pi / L * (x - xc))); });
  return w;
}

}  // namespace romswe
