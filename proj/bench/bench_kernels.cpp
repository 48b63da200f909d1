// Serial reference kernels against their OpenMP counterparts.

#include <benchmark/benchmark.h>

#include <memory>
#include <random>

#include "lobsim/eval_protocol.hpp"
#include "lobsim/indicators.hpp"
#include "lobsim/policy.hpp"
#include "lobsim/stats.hpp"
#include "lobsim/synthetic.hpp"

using namespace lobsim;

namespace {

const DayBookPtr& bench_day() {
    static const DayBookPtr day = [] {
        synthetic::MarketParams p;
        p.snapshots = 7200;
        return std::make_shared<const DayBook>(synthetic::generate_day(Date(20200201), p, 1));
    }();
    return day;
}

std::vector<double> gaps(std::size_t n) {
    std::mt19937_64 eng(5);
    std::normal_distribution<double> nd(1.0, 1.0);
    std::vector<double> d(n);
    for (auto& v : d) v = nd(eng);
    return d;
}

void BM_indicator_series_serial(benchmark::State& state) {
    const auto& day = *bench_day();
    for (auto _ : state) benchmark::DoNotOptimize(serial::indicator_series(day, 0, day.size()));
}

void BM_indicator_series_parallel(benchmark::State& state) {
    const auto& day = *bench_day();
    for (auto _ : state) benchmark::DoNotOptimize(indicator_series(day, 0, day.size()));
}

void BM_bootstrap_serial(benchmark::State& state) {
    const auto d = gaps(27);
    stats::BootstrapSettings s;
    s.resamples = static_cast<std::size_t>(state.range(0));
    for (auto _ : state) benchmark::DoNotOptimize(stats::serial::bootstrap_ci_mean(d, s));
}

void BM_bootstrap_parallel(benchmark::State& state) {
    const auto d = gaps(27);
    stats::BootstrapSettings s;
    s.resamples = static_cast<std::size_t>(state.range(0));
    for (auto _ : state) benchmark::DoNotOptimize(stats::bootstrap_ci_mean(d, s));
}

PolicyFactory oracle_factory() {
    return [](std::uint64_t) { return std::make_unique<ThresholdOraclePolicy>(); };
}

void BM_run_day_serial(benchmark::State& state) {
    EvalSettings s;
    for (auto _ : state) benchmark::DoNotOptimize(serial::run_day(bench_day(), 1800, oracle_factory(), s));
}

void BM_run_day_parallel(benchmark::State& state) {
    EvalSettings s;
    for (auto _ : state) benchmark::DoNotOptimize(run_day(bench_day(), 1800, oracle_factory(), s));
}

}  // namespace

BENCHMARK(BM_indicator_series_serial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_indicator_series_parallel)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_bootstrap_serial)->Arg(10000)->Arg(100000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_bootstrap_parallel)->Arg(10000)->Arg(100000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_run_day_serial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_run_day_parallel)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
