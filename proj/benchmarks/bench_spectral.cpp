#include <benchmark/benchmark.h>

#include "platoon/robustness.hpp"
#include "platoon/spectral.hpp"
#include "platoon/topology.hpp"

using namespace platoon;

namespace {

GroundedSystem md_system(int n, int k) { return ground(build_platoon(n, k), md_arrangement(n, k)); }

void BM_JacobiGroundedLaplacian(benchmark::State& state) {
  const auto gs = md_system(static_cast<int>(state.range(0)), 4);
  const Matrix lg = gs.lg_real();
  for (auto _ : state) benchmark::DoNotOptimize(eig_sym(lg));
  state.SetComplexityN(static_cast<benchmark::IterationCount>(lg.rows()));
}
BENCHMARK(BM_JacobiGroundedLaplacian)->RangeMultiplier(2)->Range(16, 256)->Complexity();

void BM_BisectionGroundedLaplacian(benchmark::State& state) {
  const auto gs = md_system(static_cast<int>(state.range(0)), 4);
  const Matrix lg = gs.lg_real();
  for (auto _ : state) benchmark::DoNotOptimize(eig_sym_bisection(lg));
  state.SetComplexityN(static_cast<benchmark::IterationCount>(lg.rows()));
}
BENCHMARK(BM_BisectionGroundedLaplacian)->RangeMultiplier(2)->Range(16, 256)->Complexity();

void BM_FormationMatrixHessenbergQr(benchmark::State& state) {
  const auto gs = md_system(static_cast<int>(state.range(0)), 2);
  const Matrix b = build_formation_matrix(gs);
  for (auto _ : state) benchmark::DoNotOptimize(eig_general(b));
}
BENCHMARK(BM_FormationMatrixHessenbergQr)->Arg(12)->Arg(24)->Arg(48);

void BM_FrequencySweep(benchmark::State& state) {
  const auto s = eig_sym(md_system(36, 4).lg());
  const auto dynamics = state.range(0) == 0 ? Dynamics::velocity : Dynamics::formation;
  const auto grid = FrequencyGrid::defaults(s, dynamics);
  for (auto _ : state) benchmark::DoNotOptimize(sweep_hinf(s, dynamics, grid));
}
BENCHMARK(BM_FrequencySweep)->Arg(0)->Arg(1);

void BM_Analyze(benchmark::State& state) {
  const auto topo = build_platoon(static_cast<int>(state.range(0)), 4);
  const auto refs = md_arrangement(static_cast<int>(state.range(0)), 4);
  for (auto _ : state) benchmark::DoNotOptimize(analyze(topo, refs));
}
BENCHMARK(BM_Analyze)->Arg(36)->Arg(108);

}  // namespace
