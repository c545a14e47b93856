// Serial reference vs OpenMP campaign on a small S1 grid.

#include "basinstab/montecarlo.h"

#include <benchmark/benchmark.h>

#include <omp.h>

using namespace basinstab;

namespace {

RunConfig bench_config() {
    RunConfig c = default_run_config("s1");
    c.domain.omega = {0.25, 0.35};
    c.domain.amplitude = {1.1, 1.5};
    c.nx = 4;
    c.ny = 4;
    c.n_samples = 64;
    c.mismatch.relative_bound = 0.1;
    c.classifier.transient_periods = 100;
    c.classifier.observation_periods = 40;
    return c;
}

void BM_CampaignSerial(benchmark::State& state) {
    const RunConfig c = bench_config();
    for (auto _ : state) benchmark::DoNotOptimize(run_campaign_serial(c).grid.total());
    state.SetItemsProcessed(state.iterations() * c.n_samples);
}

void BM_CampaignParallel(benchmark::State& state) {
    const RunConfig c = bench_config();
    CampaignOptions o;
    o.workers = static_cast<int>(state.range(0));
    for (auto _ : state) benchmark::DoNotOptimize(run_campaign(c, o).grid.total());
    state.SetItemsProcessed(state.iterations() * c.n_samples);
}

void BM_Trajectory(benchmark::State& state) {
    const RunConfig c = default_run_config(state.range(0) == 1 ? "s1" : state.range(0) == 3 ? "s3" : "s4");
    const Sample s = draw_sample(c, 0);
    for (auto _ : state)
        benchmark::DoNotOptimize(
            simulate_trajectory(s.params, s.initial_state, c.integrator, c.classifier.total_periods()).accepted_steps);
}

}  // namespace

BENCHMARK(BM_CampaignSerial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_CampaignParallel)->Arg(1)->Arg(2)->Arg(4)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Trajectory)->Arg(1)->Arg(3)->Arg(4)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
