#include <benchmark/benchmark.h>

#include "platoon/dde_sim.hpp"
#include "platoon/topology.hpp"

using namespace platoon;

namespace {

void run(benchmark::State& state, Dynamics kind, DelayMode mode) {
  const int n = static_cast<int>(state.range(0));
  const auto gs = ground(build_platoon(n, 4), md_arrangement(n, 4));
  const SimSystem sys = kind == Dynamics::velocity ? SimSystem::velocity(gs) : SimSystem::formation(gs);
  const auto x0 = random_state(sys.state_size(), 1);
  SimOptions opt;
  opt.horizon = 10.0;
  opt.step = 1e-3;
  opt.record_states = false;
  const DelaySpec delay{mode == DelayMode::none ? 0.0 : 0.09, mode};
  for (auto _ : state) benchmark::DoNotOptimize(simulate(sys, delay, x0, opt));
  state.SetItemsProcessed(state.iterations() * 10000);
}

void BM_VelocityUndelayed(benchmark::State& s) { run(s, Dynamics::velocity, DelayMode::none); }
void BM_VelocityDelayed(benchmark::State& s) { run(s, Dynamics::velocity, DelayMode::full); }
void BM_VelocitySelfUndelayed(benchmark::State& s) { run(s, Dynamics::velocity, DelayMode::self_undelayed); }
void BM_FormationDelayed(benchmark::State& s) { run(s, Dynamics::formation, DelayMode::full); }

BENCHMARK(BM_VelocityUndelayed)->Arg(36)->Arg(144)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_VelocityDelayed)->Arg(36)->Arg(144)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_VelocitySelfUndelayed)->Arg(36)->Arg(144)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_FormationDelayed)->Arg(36)->Arg(144)->Unit(benchmark::kMillisecond);

}  // namespace
