#include <random>

#include <Eigen/QR>

#include <benchmark/benchmark.h>

#include "romswe/galerkin.hpp"
#include "romswe/lstsq.hpp"
#include "romswe/pod.hpp"

using namespace romswe;

namespace {

constexpr double kLength = 5.0e6;

struct Vortex {
  Grid grid;
  DiffOperators ops;
  PhysicalParams params = PhysicalParams::with_coriolis(6.147e-5);
  State initial;
  explicit Vortex(int n)
      : grid(Grid::square(n, kLength)), ops(build_diff_2d(grid)),
        initial(double_vortex_initial(grid, params, DoubleVortexScenario::with_length(kLength))) {}
};

Eigen::MatrixXd gaussian(Eigen::Index rows, Eigen::Index cols, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd;
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = nd(rng);
  return m;
}

PodBasis random_basis(Eigen::Index nodes, int r) {
  PodBasis b;
  for (int j = 0; j < 4; ++j) {
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(gaussian(nodes, r, 10 + j));
    b.modes[j] = qr.householderQ() * Eigen::MatrixXd::Identity(nodes, r);
    b.singular_values[j] = Eigen::VectorXd::Ones(r);
  }
  return b;
}

void BM_Rhs(benchmark::State& state) {
  const Vortex v(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(rhs(v.initial, v.params, v.ops));
}
BENCHMARK(BM_Rhs)->Arg(32)->Arg(64)->Arg(120);

void BM_KahanStep(benchmark::State& state) {
  const Vortex v(static_cast<int>(state.range(0)));
  KahanStepper stepper(v.params, v.ops);
  State w = v.initial;
  for (auto _ : state) w = stepper.step(w, 486.0);
  state.SetLabel(v.grid.size() * 4 > 20000 ? "bicgstab" : "sparse LU");
}
BENCHMARK(BM_KahanStep)->Arg(32)->Arg(64)->Arg(120)->Unit(benchmark::kMillisecond);

void BM_GalerkinAssembly(benchmark::State& state) {
  const Vortex v(64);
  const PodBasis basis = random_basis(v.grid.size(), static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(assemble_galerkin(basis, v.params, v.ops));
}
BENCHMARK(BM_GalerkinAssembly)->Arg(5)->Arg(10)->Arg(20)->Unit(benchmark::kMillisecond);

void BM_ReducedStep(benchmark::State& state) {
  const Vortex v(32);
  const int r = static_cast<int>(state.range(0));
  const PodBasis basis = random_basis(v.grid.size(), r);
  const ReducedModel model = assemble_galerkin(basis, v.params, v.ops);
  Eigen::VectorXd z = project(basis, v.initial);
  for (auto _ : state) benchmark::DoNotOptimize(reduced_kahan_step(model, z, 486.0, v.params.f));
}
BENCHMARK(BM_ReducedStep)->Arg(5)->Arg(10)->Arg(20)->Arg(40);

void BM_MinNormLstsq(benchmark::State& state) {
  const Eigen::Index r = state.range(0);
  const Eigen::Index cols = 3 * r * r + r;
  const Eigen::MatrixXd a = gaussian(2 * cols, cols, 1), b = gaussian(2 * cols, r, 2);
  for (auto _ : state) benchmark::DoNotOptimize(min_norm_lstsq(a, b, 1e-12));
}
BENCHMARK(BM_MinNormLstsq)->Arg(5)->Arg(10)->Arg(20)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
