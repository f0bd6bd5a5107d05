#include <benchmark/benchmark.h>

#include "sharedctl/inference.hpp"

using namespace sharedctl;

namespace {

Scenario scenario() { return load_scenario(SHAREDCTL_BENCH_DATA_DIR "/scenarios/tabletop4.json"); }

void BM_BuildTransitionMatrix(benchmark::State& state) {
  const std::vector<std::size_t> sizes(static_cast<std::size_t>(state.range(0)), 3);
  HmmParams p;
  p.t_goal = 0.05;
  for (auto _ : state) benchmark::DoNotOptimize(build_transition_matrix(sizes, p));
  state.SetComplexityN(state.range(0) * 3);
}
BENCHMARK(BM_BuildTransitionMatrix)->RangeMultiplier(2)->Range(1, 64)->Complexity();

void BM_ObservationLikelihoods(benchmark::State& state) {
  const Scenario sc = scenario();
  const WorldModel world = sc.world();
  const Action u = world.actions(ControlMode::Position)[1];
  const HmmParams p;
  for (auto _ : state) {
    benchmark::DoNotOptimize(observation_likelihoods(sc, world, sc.start_pose(), u, ControlMode::Position, p));
  }
}
BENCHMARK(BM_ObservationLikelihoods);

void BM_ForwardUpdate(benchmark::State& state) {
  const Scenario sc = scenario();
  const WorldModel world = sc.world();
  const HmmParams p;
  const TransitionMatrix t = build_transition_matrix(sc, p);
  const Action u = world.actions(ControlMode::Position)[1];
  Belief b = Belief::uniform(sc.state_count());
  for (auto _ : state) {
    b = forward_update(b, u, ControlMode::Position, sc.start_pose(), t, sc, world, p);
    benchmark::DoNotOptimize(b.probs.data());
  }
}
BENCHMARK(BM_ForwardUpdate);

}  // namespace
