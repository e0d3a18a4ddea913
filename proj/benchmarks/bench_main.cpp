#include "qlink/model/single_click.h"
#include "qlink/quantum/readout.h"
#include "qlink/sim/link_simulator.h"
#include "qlink/util/rng.h"

#include <benchmark/benchmark.h>

namespace {

void BM_HeraldedStateEnumeration(benchmark::State& state) {
  const qlink::LinkParameters p = qlink::heralded_parameters();
  for (auto _ : state) {
    benchmark::DoNotOptimize(qlink::heralded_state(p, 0.0));
  }
}
BENCHMARK(BM_HeraldedStateEnumeration)->Unit(benchmark::kMillisecond);

void BM_MonteCarlo(benchmark::State& state) {
  const qlink::LinkParameters p = qlink::heralded_parameters();
  qlink::MonteCarloOptions opt;
  opt.samples = static_cast<std::uint64_t>(state.range(0));
  opt.batches = 10;
  for (auto _ : state) {
    qlink::Rng rng(7);
    benchmark::DoNotOptimize(qlink::monte_carlo_heralded(p, 0.0, rng, opt));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_MonteCarlo)->Arg(10000)->Arg(100000)->Unit(benchmark::kMillisecond);

void BM_PostSelectedEventLoop(benchmark::State& state) {
  qlink::LinkSimConfig c;
  c.physics = qlink::delayed_choice_parameters();
  c.physics.window_ns = 20.0;
  c.duration_s = static_cast<double>(state.range(0));
  for (auto _ : state) {
    benchmark::DoNotOptimize(qlink::run_post_selected(c));
  }
}
BENCHMARK(BM_PostSelectedEventLoop)->Arg(60)->Arg(600)->Unit(benchmark::kMillisecond);

void BM_HeraldedEventLoop(benchmark::State& state) {
  qlink::LinkSimConfig c;
  c.physics = qlink::heralded_parameters();
  c.duration_s = static_cast<double>(state.range(0));
  for (auto _ : state) {
    benchmark::DoNotOptimize(qlink::run_heralded(c));
  }
}
BENCHMARK(BM_HeraldedEventLoop)->Arg(600)->Unit(benchmark::kMillisecond);

void BM_UnfoldReadout(benchmark::State& state) {
  const qlink::ReadoutModel m = qlink::ReadoutModel::symmetric(0.94, 0.95);
  const qlink::OutcomeDistribution observed{0.1, 0.4, 0.35, 0.15};
  for (auto _ : state) {
    benchmark::DoNotOptimize(qlink::unfold_readout(observed, m));
  }
}
BENCHMARK(BM_UnfoldReadout);

}  // namespace

BENCHMARK_MAIN();
