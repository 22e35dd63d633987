#include <benchmark/benchmark.h>

#include "otsym/reference.hpp"
#include "otsym/rng.hpp"
#include "otsym/transport.hpp"

using namespace otsym;

namespace {

Eigen::MatrixXd gaussian_data(int n, int p, std::uint64_t seed) {
  Rng rng = make_rng(seed, Stream::Scenario);
  Eigen::MatrixXd x(n, p);
  for (int i = 0; i < n; ++i)
    for (int k = 0; k < p; ++k) x(i, k) = standard_normal(rng);
  return x;
}

CostMatrix central_costs(int n) {
  const auto ref = build_reference(SymmetryGroup::central(2), ErdKind::Gaussian, n, ConstructionKind::Halton);
  return build_cost_matrix(ref.group(), gaussian_data(n, 2, 1), ref.points());
}

}  // namespace

static void BM_LapDense(benchmark::State& state) {
  const CostMatrix c = central_costs(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(solve_lap_dense(c));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_LapDense)->RangeMultiplier(2)->Range(16, 256)->Unit(benchmark::kMillisecond)->Complexity();

static void BM_LapSparse(benchmark::State& state) {
  const CostMatrix c = central_costs(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(solve_lap_sparse(c));
}
BENCHMARK(BM_LapSparse)->Arg(200)->Arg(500)->Arg(1000)->Unit(benchmark::kMillisecond);

static void BM_CostMatrix(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const auto ref = build_reference(SymmetryGroup::sign_change(2), ErdKind::Gaussian, n, ConstructionKind::Halton);
  const Eigen::MatrixXd x = gaussian_data(n, 2, 2);
  for (auto _ : state) benchmark::DoNotOptimize(build_cost_matrix(ref.group(), x, ref.points()));
}
BENCHMARK(BM_CostMatrix)->Arg(500)->Unit(benchmark::kMillisecond);

// The sort-based path should stay far under a second at this size.
static void BM_Spherical(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const auto ref = build_reference(SymmetryGroup::spherical(3), ErdKind::Gaussian, n, ConstructionKind::Halton);
  const Eigen::MatrixXd x = gaussian_data(n, 3, 3);
  for (auto _ : state) benchmark::DoNotOptimize(solve_spherical(x, ref.points()));
}
BENCHMARK(BM_Spherical)->Arg(1000)->Arg(100000)->Unit(benchmark::kMillisecond);
