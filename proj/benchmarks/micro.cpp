#include <benchmark/benchmark.h>

#include "rapm/numerics.hpp"
#include "rapm/problems.hpp"
#include "rapm/prox.hpp"
#include "rapm/rng.hpp"
#include "rapm/solvers.hpp"

using namespace rapm;

namespace {

Vector gaussian(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  Vector v(static_cast<Eigen::Index>(n));
  for (auto& x : v) x = 3.0 * rng.normal();
  return v;
}

void BM_ProjectL1Ball(benchmark::State& state) {
  const Vector u = gaussian(static_cast<std::size_t>(state.range(0)), 1);
  for (auto _ : state) benchmark::DoNotOptimize(project_l1_ball(u, 1.0));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_ProjectL1Ball)->RangeMultiplier(10)->Range(10, 100000)->Complexity(benchmark::oNLogN);

void BM_SpectralNormSq(benchmark::State& state) {
  const auto m = static_cast<std::size_t>(state.range(0));
  const RegressionData d = make_regression_data(m, 1, m * 5 / 6, 1, 0.0, 1.0, 2);
  for (auto _ : state) benchmark::DoNotOptimize(spectral_norm_sq(d.A_tr));
}
BENCHMARK(BM_SpectralNormSq)->Arg(60)->Arg(300)->Arg(1200);

void BM_QMap(benchmark::State& state) {
  const ProblemSpec p = make_sparse_regression(60, 40, 50, 5, 0.01, 1.0, 7);
  const Vector x = gaussian(50, 3) / 50.0;
  const double eta = 1e-3;
  const double gamma = max_step(p, eta);
  for (auto _ : state) benchmark::DoNotOptimize(q_map(p, eta, gamma, x));
}
BENCHMARK(BM_QMap);

void BM_Solver(benchmark::State& state) {
  const ProblemSpec p = make_sparse_regression(60, 40, 50, 5, 0.01, 1.0, 7);
  SolverConfig c;
  c.variant = static_cast<Variant>(state.range(0));
  c.K = 1000;
  c.record_every = 1000;
  for (auto _ : state) benchmark::DoNotOptimize(solve(p, c));
  state.SetLabel(to_string(c.variant));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(c.K));
}
BENCHMARK(BM_Solver)
    ->Arg(static_cast<int>(Variant::RAPM))
    ->Arg(static_cast<int>(Variant::RPM))
    ->Arg(static_cast<int>(Variant::BiGSAM))
    ->Arg(static_cast<int>(Variant::aIRG))
    ->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
