#include <benchmark/benchmark.h>

#include "sharedctl/episode.hpp"
#include "sharedctl/experiment.hpp"

using namespace sharedctl;

namespace {

void BM_RunEpisode(benchmark::State& state) {
  const Scenario sc = load_scenario(SHAREDCTL_BENCH_DATA_DIR "/scenarios/tabletop4.json");
  LoopConfig loop;
  loop.controller.alpha = static_cast<double>(state.range(0)) / 100.0;
  OperatorConfig op;
  op.intended_grasp_id = "B_side";
  op.p_idle_when_helped = 0.8;
  std::uint64_t seed = 0;
  std::size_t ticks = 0;
  for (auto _ : state) {
    const EpisodeLog log = run_episode(sc, loop, op, ++seed);
    ticks += log.records.size();
  }
  state.counters["ticks/s"] = benchmark::Counter(static_cast<double>(ticks), benchmark::Counter::kIsRate);
}
BENCHMARK(BM_RunEpisode)->Arg(0)->Arg(50)->Arg(99)->Unit(benchmark::kMicrosecond);

void BM_Round(benchmark::State& state) {
  const Scenario sc = load_scenario(SHAREDCTL_BENCH_DATA_DIR "/scenarios/tabletop4.json");
  LoopConfig loop;
  loop.controller.alpha = 0.5;
  OperatorProfile profile;
  profile.p_idle_when_helped = 0.8;
  std::uint32_t rep = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(run_round(sc, loop, profile, RoundOptions{7, rep++, 4}));
  }
}
BENCHMARK(BM_Round)->Unit(benchmark::kMillisecond);

}  // namespace
