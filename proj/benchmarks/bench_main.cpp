#include "sro/benchmarks.hpp"
#include "sro/evaluate.hpp"
#include "sro/reformulate.hpp"

#include <benchmark/benchmark.h>

using namespace sro;

namespace {

void BM_MultiPolicySolve(benchmark::State& state) {
    const int N = static_cast<int>(state.range(0));
    const auto inst = gen_inventory(4, 20.0, 1);
    const auto train = sample(inst.distribution, static_cast<std::size_t>(N), 16);
    const RobustConfig cfg{Norm::L2, radius_schedule(10.0, 0.1, N)};
    for (auto _ : state) {
        benchmark::DoNotOptimize(solve_method(inst.problem, train, Method::MP, cfg).objective);
    }
    state.SetComplexityN(N);
}
BENCHMARK(BM_MultiPolicySolve)->RangeMultiplier(4)->Range(8, 128)->Unit(benchmark::kMillisecond)->Complexity();

void BM_SaaSolve(benchmark::State& state) {
    const int N = static_cast<int>(state.range(0));
    const auto inst = gen_inventory(4, 20.0, 1);
    const auto train = sample(inst.distribution, static_cast<std::size_t>(N), 16);
    for (auto _ : state) {
        benchmark::DoNotOptimize(solve_method(inst.problem, train, Method::SAA, {}).objective);
    }
}
BENCHMARK(BM_SaaSolve)->RangeMultiplier(4)->Range(8, 512)->Unit(benchmark::kMillisecond);

void BM_SecondStageCost(benchmark::State& state) {
    const int n = static_cast<int>(state.range(0));
    const auto inst = gen_inventory(n, 20.0, 1);
    const auto test = sample(inst.distribution, 64, 1);
    const Eigen::VectorXd x = Eigen::VectorXd::Constant(n, 20.0);
    std::size_t k = 0;
    for (auto _ : state) {
        benchmark::DoNotOptimize(second_stage_cost(inst.problem, x, test.points[k++ % test.size()]).cost);
    }
    state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_SecondStageCost)->Arg(4)->Arg(6)->Arg(10);

void BM_SchedulingSecondStage(benchmark::State& state) {
    const auto inst = gen_scheduling(8, 2.0, 1);
    const auto test = sample(inst.distribution, 64, 1);
    const Eigen::VectorXd x = inst.distribution.mean;
    std::size_t k = 0;
    for (auto _ : state) {
        benchmark::DoNotOptimize(second_stage_cost(inst.problem, x, test.points[k++ % test.size()]).cost);
    }
    state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_SchedulingSecondStage);

} // namespace

BENCHMARK_MAIN();
