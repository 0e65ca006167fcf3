// Serial reference kernels against their OpenMP counterparts. Pass
// --benchmark_filter to narrow; thread count follows OMP_NUM_THREADS. Wall
// time is reported, since CPU time only counts the calling thread.

#include <tslasso/dgm.hpp>
#include <tslasso/harness.hpp>
#include <tslasso/kernels.hpp>
#include <tslasso/lasso.hpp>
#include <tslasso/problem.hpp>

#include <benchmark/benchmark.h>

using namespace tslasso;

namespace {

RegressionProblem make_problem(std::size_t p, std::size_t T)
{
    const SubgaussianVar m{banded_sparse_coefficients(p, 10, 0.9)};
    return build_problem(simulate(m, T + 1, 7), 1);
}

void BM_GramSerial(benchmark::State& st)
{
    const auto prob = make_problem(static_cast<std::size_t>(st.range(0)), static_cast<std::size_t>(st.range(1)));
    for (auto _ : st) benchmark::DoNotOptimize(kernels::gram_serial(prob.X));
}

void BM_GramParallel(benchmark::State& st)
{
    const auto prob = make_problem(static_cast<std::size_t>(st.range(0)), static_cast<std::size_t>(st.range(1)));
    for (auto _ : st) benchmark::DoNotOptimize(kernels::gram_parallel(prob.X));
}

void BM_CrossSerial(benchmark::State& st)
{
    const auto prob = make_problem(static_cast<std::size_t>(st.range(0)), static_cast<std::size_t>(st.range(1)));
    for (auto _ : st) benchmark::DoNotOptimize(kernels::cross_serial(prob.X, prob.Y));
}

void BM_CrossParallel(benchmark::State& st)
{
    const auto prob = make_problem(static_cast<std::size_t>(st.range(0)), static_cast<std::size_t>(st.range(1)));
    for (auto _ : st) benchmark::DoNotOptimize(kernels::cross_parallel(prob.X, prob.Y));
}

LassoConfig bench_lasso(std::size_t p, std::size_t T)
{
    LassoConfig cfg;
    cfg.lambda = lambda_value(2.0, p, p, T);
    return cfg;
}

void BM_LassoSerial(benchmark::State& st)
{
    const auto p = static_cast<std::size_t>(st.range(0)), T = static_cast<std::size_t>(st.range(1));
    const auto prob = make_problem(p, T);
    const auto cfg = bench_lasso(p, T);
    for (auto _ : st) benchmark::DoNotOptimize(solve_serial(prob.X, prob.Y, cfg));
}

void BM_LassoParallel(benchmark::State& st)
{
    const auto p = static_cast<std::size_t>(st.range(0)), T = static_cast<std::size_t>(st.range(1));
    const auto prob = make_problem(p, T);
    const auto cfg = bench_lasso(p, T);
    for (auto _ : st) benchmark::DoNotOptimize(solve(prob.X, prob.Y, cfg));
}

// One (example, p) block of the scaling study with `workers` cell threads.
void BM_ScalingBlock(benchmark::State& st)
{
    ExperimentConfig cfg;
    cfg.examples = {Example::gaussian_var};
    cfg.p_grid = {50};
    cfg.T_grid = {500, 1000, 2000};
    cfg.replicates = 4;
    cfg.workers = static_cast<std::size_t>(st.range(0));
    validate_config(cfg);
    for (auto _ : st) benchmark::DoNotOptimize(run_scaling_experiment(cfg));
}

} // namespace

#define SIZES ->Args({50, 2000})->Args({100, 8000})->Unit(benchmark::kMillisecond)->UseRealTime()
BENCHMARK(BM_GramSerial) SIZES;
BENCHMARK(BM_GramParallel) SIZES;
BENCHMARK(BM_CrossSerial) SIZES;
BENCHMARK(BM_CrossParallel) SIZES;
BENCHMARK(BM_LassoSerial) SIZES;
BENCHMARK(BM_LassoParallel) SIZES;
BENCHMARK(BM_ScalingBlock)->Arg(1)->Arg(4)->Unit(benchmark::kMillisecond)->UseRealTime();

BENCHMARK_MAIN();
