#include <benchmark/benchmark.h>

#include "otsym/reference.hpp"
#include "otsym/rng.hpp"
#include "otsym/signedrank.hpp"
#include "otsym/stats.hpp"

using namespace otsym;

static void BM_Decompose(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const auto ref = build_reference(SymmetryGroup::central(2), ErdKind::Gaussian, n, ConstructionKind::Halton);
  Rng rng = make_rng(4, Stream::Scenario);
  Eigen::MatrixXd x(n, 2);
  for (int i = 0; i < n; ++i) x.row(i) << standard_normal(rng), standard_normal(rng);
  for (auto _ : state) benchmark::DoNotOptimize(decompose(x, ref, 5));
}
BENCHMARK(BM_Decompose)->Arg(100)->Arg(500)->Unit(benchmark::kMillisecond);

static void BM_ExactNull(benchmark::State& state) {
  const auto ref = build_reference(SymmetryGroup::central(2), ErdKind::Gaussian, 200, ConstructionKind::Halton);
  const int b = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(exact_null(ref, TestKind::GWSR, b, 6, 1));
  state.SetItemsProcessed(state.iterations() * b);
}
BENCHMARK(BM_ExactNull)->Arg(999)->Unit(benchmark::kMillisecond);
