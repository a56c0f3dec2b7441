#include <benchmark/benchmark.h>

#include "lvbuddy/buddying.hpp"
#include "lvbuddy/ingestion.hpp"
#include "lvbuddy/synthgen.hpp"
#include "lvbuddy/uncertainty.hpp"

using namespace lvbuddy;

namespace {

ScenarioConfig base_config(int window_days) {
    ScenarioConfig cfg;
    cfg.seed = 99;
    cfg.n_profiles = 60;
    cfg.n_feeders = 1;
    cfg.customers_min = 6;
    cfg.customers_max = 6;
    cfg.nondom_fraction = 0.25;
    cfg.noise_level = 0.15;
    cfg.substation_noise = 0.02;
    cfg.window_days = window_days;
    return cfg;
}

void bm_cost(benchmark::State& state) {
    const auto cfg = base_config(static_cast<int>(state.range(0)));
    const auto sc = generate_scenario(cfg);
    const auto& f = sc.feeders[0].feeder;
    const auto md = resolve_mean_daily({f});
    const auto a = simple_buddy(f, sc.pool, md);
    const DayWindow win{0, cfg.window_days};
    for (auto _ : state)
        benchmark::DoNotOptimize(cost(f, a, sc.pool, md, 0.5, win).total);
}
BENCHMARK(bm_cost)->Arg(28)->Arg(98)->Arg(364);

void bm_simple_buddy(benchmark::State& state) {
    const auto cfg = base_config(28);
    const auto sc = generate_scenario(cfg);
    const auto& f = sc.feeders[0].feeder;
    const auto md = resolve_mean_daily({f});
    for (auto _ : state)
        benchmark::DoNotOptimize(simple_buddy(f, sc.pool, md).choices.size());
}
BENCHMARK(bm_simple_buddy);

void bm_ga_buddy(benchmark::State& state) {
    const auto cfg = base_config(28);
    const auto sc = generate_scenario(cfg);
    const auto& f = sc.feeders[0].feeder;
    const auto md = resolve_mean_daily({f});
    GAConfig ga;
    ga.w = 0.5;
    ga.seed = 3;
    ga.population_size = static_cast<int>(state.range(0));
    ga.max_generations = 50;
    ga.stall_generations = 50;
    for (auto _ : state)
        benchmark::DoNotOptimize(ga_buddy(f, sc.pool, md, ga, {0, 21}).cost.total);
}
BENCHMARK(bm_ga_buddy)->Arg(20)->Arg(100)->Unit(benchmark::kMillisecond);

void bm_bootstrap_bands(benchmark::State& state) {
    const auto cfg = base_config(28);
    const auto sc = generate_scenario(cfg);
    const auto& f = sc.feeders[0].feeder;
    const auto md = resolve_mean_daily({f});
    BootstrapConfig bc;
    bc.n_resamples = static_cast<int>(state.range(0));
    bc.seed = 5;
    for (auto _ : state)
        benchmark::DoNotOptimize(bootstrap_bands(f, sc.pool, md, bc, {0, 28}).lower.values[0]);
}
BENCHMARK(bm_bootstrap_bands)->Arg(100)->Arg(1500)->Unit(benchmark::kMillisecond);

void bm_fit_quantile_model(benchmark::State& state) {
    const auto cfg = base_config(static_cast<int>(state.range(0)));
    const auto sc = generate_scenario(cfg);
    const auto& sub = *sc.feeders[0].feeder.substation_series;
    for (auto _ : state)
        benchmark::DoNotOptimize(fit_quantile_model(sub, cfg.window_start, 0.9, 3).coef[0][0]);
}
BENCHMARK(bm_fit_quantile_model)->Arg(98)->Arg(364)->Unit(benchmark::kMillisecond);

void bm_clean_series(benchmark::State& state) {
    const auto cfg = base_config(static_cast<int>(state.range(0)));
    const auto pool = generate_pool(cfg);
    const auto& series = pool.profiles[0].series;
    for (auto _ : state)
        benchmark::DoNotOptimize(clean_series(series).second.total());
}
BENCHMARK(bm_clean_series)->Arg(98)->Arg(364);

}  // namespace

BENCHMARK_MAIN();
