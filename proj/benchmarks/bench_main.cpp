#include "aapcd/delays.hpp"
#include "aapcd/model.hpp"
#include "aapcd/parameters.hpp"
#include "aapcd/prox.hpp"
#include "aapcd/solver.hpp"
#include "aapcd/synthetic.hpp"

#include <benchmark/benchmark.h>

#include <memory>
#include <vector>

namespace {

using namespace aapcd;

ProblemSpec logistic_problem(std::size_t rows, std::size_t cols)
{
    auto data = std::make_shared<const Dataset>(make_classification(rows, cols, 7));
    ProblemSpec p(data, LossKind::logistic, Regularizer::capped_l1(1e-4, 1e-5));
    p.set_lipschitz(lipschitz_estimate(p));
    return p;
}

SolverConfig config_for(const ProblemSpec& p, std::size_t iterations)
{
    SolverConfig c;
    c.beta = 0.8;
    c.beta_neg = -0.08;
    c.t1 = 4;
    c.eta = stepsize_bounded_feasible(p.lipschitz(), 4, 8, c.beta);
    c.iterations = iterations;
    c.seed = 1;
    return c;
}

void BM_ProxCappedL1(benchmark::State& state)
{
    Rng rng(3);
    std::vector<ProxQuery> qs(1024);
    for (auto& q : qs) q = {4.0 * rng.uniform() - 2.0, 0.5, 1.0, 0.3};
    std::size_t i = 0;
    for (auto _ : state) benchmark::DoNotOptimize(prox_capped_l1(qs[i++ & 1023]));
}
BENCHMARK(BM_ProxCappedL1);

void BM_ProxL1(benchmark::State& state)
{
    Rng rng(3);
    std::vector<ProxQuery> qs(1024);
    for (auto& q : qs) q = {4.0 * rng.uniform() - 2.0, 0.5, 1.0, 0.0};
    std::size_t i = 0;
    for (auto _ : state) benchmark::DoNotOptimize(prox_l1(qs[i++ & 1023]));
}
BENCHMARK(BM_ProxL1);

void BM_Step(benchmark::State& state)
{
    const auto rows = static_cast<std::size_t>(state.range(0));
    const auto p = logistic_problem(rows, 50);
    const auto c = config_for(p, 0);
    IterateState s(p, std::vector<double>(p.dimension(), 0.0));
    StepWorkspace ws;
    ws.reserve(p);
    std::vector<double> grad(1);
    std::size_t block = 0;
    for (auto _ : state) {
        block_gradient_from_residual(p, s.z, block, grad);
        benchmark::DoNotOptimize(step_with_gradient(s, p, c, block, grad, 0, ws, 1.0));
        block = (block + 1) % p.blocks().count();
    }
    state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_Step)->Arg(200)->Arg(2000);

void BM_SimulatedRun(benchmark::State& state)
{
    const auto p = logistic_problem(200, 50);
    const auto c = config_for(p, 5000);
    for (auto _ : state) {
        auto schedule = DelaySchedule::bounded(8, 2);
        benchmark::DoNotOptimize(run_stochastic(p, c, schedule).objective);
    }
    state.SetItemsProcessed(state.iterations() * 5000);
}
BENCHMARK(BM_SimulatedRun)->Unit(benchmark::kMillisecond);

void BM_MeasuredRun(benchmark::State& state)
{
    const auto p = logistic_problem(200, 50);
    auto c = config_for(p, 5000);
    c.workers = static_cast<std::size_t>(state.range(0));
    for (auto _ : state) {
        auto schedule = DelaySchedule::measured();
        benchmark::DoNotOptimize(run_stochastic(p, c, schedule).objective);
    }
    state.SetItemsProcessed(state.iterations() * 5000);
}
BENCHMARK(BM_MeasuredRun)->Arg(1)->Arg(2)->Arg(4)->Unit(benchmark::kMillisecond)->UseRealTime();

} // namespace

BENCHMARK_MAIN();
