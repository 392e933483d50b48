#include "aapcd/parameters.hpp"
#include "aapcd/solver.hpp"
#include "aapcd/synthetic.hpp"

#include "../support/oracles.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <memory>

using namespace aapcd;

namespace {

struct Lasso {
    std::shared_ptr<const Dataset> data;
    std::vector<double> targets;
    ProblemSpec problem;

    Lasso(std::size_t rows, std::size_t cols, double lambda, std::uint64_t seed)
        : Lasso(make_regression(rows, cols, 5, 0.1, seed), lambda)
    {
    }
    Lasso(RegressionData r, double lambda)
        : data(std::make_shared<const Dataset>(std::move(r.data))),
          targets(std::move(r.targets)),
          problem(data, LossKind::quadratic, Regularizer::l1(lambda))
    {
        problem.set_targets(targets);
        problem.set_lipschitz(lipschitz_estimate(problem));
    }
};

ProblemSpec logistic_capped(std::uint64_t seed = 7)
{
    auto data = std::make_shared<const Dataset>(make_classification(60, 12, seed));
    ProblemSpec p(data, LossKind::logistic, Regularizer::capped_l1(1e-3, 1e-2));
    p.set_lipschitz(lipschitz_estimate(p));
    return p;
}

SolverConfig base_config(const ProblemSpec& p, std::size_t iterations)
{
    SolverConfig c;
    c.beta = 0.8;
    c.beta_neg = -0.08;
    c.t1 = 2;
    c.eta = stepsize_bounded_feasible(p.lipschitz(), 2, 4, 0.8);
    c.iterations = iterations;
    c.seed = 3;
    return c;
}

void expect_acceptance_rule(const IterationTrace& t)
{
    for (const auto& r : t.records) {
        ASSERT_EQ(r.F, std::min(r.F_x, r.F_v)) << "k = " << r.k;
        ASSERT_EQ(r.branch == Branch::v, r.F_v < r.F_x) << "k = " << r.k;
    }
}

} // namespace

TEST(Step, FiveIterationsByHand)
{
    // f = (1/4)[(x1 + x2/2 - 1)^2 + (x2 + 1)^2], g = 0.1 ||x||_1; values from a
    // direct evaluation of the update rule.
    const std::vector<double> dense{1.0, 0.5, 0.0, 1.0};
    auto data = std::make_shared<const Dataset>(Dataset::from_dense(2, 2, dense, {1.0, -1.0}));
    ProblemSpec p(data, LossKind::quadratic, Regularizer::l1(0.1));
    p.set_lipschitz(1.0);
    SolverConfig c;
    c.eta = 0.5;
    c.beta = 0.8;
    c.beta_neg = -0.5;
    c.t1 = 0;
    c.iterations = 5;
    auto schedule = DelaySchedule::scripted({0, 1, 1, 2, 0});
    const auto r = run_deterministic(p, c, schedule);

    struct Row {
        std::size_t block, delay;
        double beta;
        Branch branch;
        double Fx, Fv, step_sq;
    };
    const Row expected[] = {
        {0, 0, 0.8, Branch::v, 0.43000000000000005, 0.38839999999999997, 0.12960000000000002},
        {1, 1, -0.5, Branch::x, 0.3721578125, 0.379839453125, 0.005625},
        {0, 1, -0.5, Branch::x, 0.3489203125, 0.3597828125, 0.012099999999999998},
        {1, 2, -0.5, Branch::x, 0.3269453124999999, 0.33680781249999997, 0.014400000000000003},
        {0, 0, 0.8, Branch::v, 0.30695634765625, 0.29507719140625, 0.037008140625000005},
    };
    ASSERT_EQ(r.trace.records.size(), 5u);
    EXPECT_NEAR(r.trace.initial_objective, 0.5, 1e-15);
    for (std::size_t k = 0; k < 5; ++k) {
        const auto& got = r.trace.records[k];
        const auto& want = expected[k];
        EXPECT_EQ(got.k, k);
        EXPECT_EQ(got.block, want.block);
        EXPECT_EQ(got.delay, want.delay);
        EXPECT_EQ(got.beta, want.beta);
        EXPECT_EQ(got.branch, want.branch);
        EXPECT_NEAR(got.F_x, want.Fx, 1e-12);
        EXPECT_NEAR(got.F_v, want.Fv, 1e-12);
        EXPECT_NEAR(got.step_sq, want.step_sq, 1e-12);
    }
    EXPECT_NEAR(r.x[0], 0.662375, 1e-12);
    EXPECT_NEAR(r.x[1], -0.195, 1e-12);
}

TEST(Step, ReducesToCoordinateGradientDescent)
{
    auto data = std::make_shared<const Dataset>(make_classification(40, 6, 2));
    ProblemSpec p(data, LossKind::logistic, Regularizer::none());
    SolverConfig c;
    c.eta = 0.7;
    c.iterations = 1;
    std::vector<double> y0{0.1, -0.2, 0.3, 0.0, 0.5, -0.4};
    IterateState s(p, y0);
    for (std::size_t j = 0; j < 6; ++j) {
        const auto before = s.y;
        const double g = block_gradient(p, before, j)[0];
        const auto rec = step(s, p, c, j, before, 0);
        EXPECT_EQ(rec.branch, Branch::x); // beta = 0: v = x, tie goes to x
        EXPECT_NEAR(s.y[j], before[j] - 0.7 * g, 1e-15);
    }
}

TEST(Step, FixedPointLeavesIterate)
{
    Lasso l(30, 6, 100.0, 1); // lambda dominates every gradient at zero
    auto c = base_config(l.problem, 1);
    IterateState s(l.problem, std::vector<double>(6, 0.0));
    const double F0 = s.objective();
    for (std::size_t j = 0; j < 6; ++j) {
        const auto rec = step(s, l.problem, c, j, s.y, 0);
        EXPECT_EQ(rec.step_sq, 0.0);
        EXPECT_EQ(rec.F, F0);
    }
    EXPECT_EQ(s.y, std::vector<double>(6, 0.0));
}

TEST(Step, OnlyTheChosenBlockMoves)
{
    auto p = logistic_capped();
    auto c = base_config(p, 1);
    std::vector<double> y0(p.dimension());
    for (std::size_t j = 0; j < y0.size(); ++j) y0[j] = 0.1 * static_cast<double>(j) - 0.5;
    IterateState s(p, y0);
    for (std::size_t j = 0; j < p.dimension(); ++j) {
        const auto before = s.y;
        step(s, p, c, j, before, 0);
        for (std::size_t i = 0; i < before.size(); ++i)
            if (i != j) ASSERT_EQ(s.y[i], before[i]);
    }
}

TEST(Step, MomentumSignFollowsThreshold)
{
    auto p = logistic_capped();
    auto c = base_config(p, 3000);
    auto schedule = DelaySchedule::bounded(6, 4);
    const auto r = run_stochastic(p, c, schedule);
    bool saw_neg = false, saw_pos = false;
    for (const auto& rec : r.trace.records) {
        if (rec.delay <= c.t1) {
            ASSERT_EQ(rec.beta, c.beta);
            saw_pos = true;
        } else {
            ASSERT_EQ(rec.beta, c.beta_neg);
            saw_neg = true;
        }
    }
    EXPECT_TRUE(saw_neg && saw_pos);
    expect_acceptance_rule(r.trace);
}

TEST(Run, ZeroIterations)
{
    auto p = logistic_capped();
    auto c = base_config(p, 0);
    auto schedule = DelaySchedule::bounded(4, 1);
    const auto r = run_stochastic(p, c, schedule);
    EXPECT_TRUE(r.trace.records.empty());
    EXPECT_EQ(r.x, std::vector<double>(p.dimension(), 0.0));
    EXPECT_NEAR(r.objective, std::log(2.0), 1e-15);
}

TEST(Run, SameSeedSameTrace)
{
    auto p = logistic_capped();
    auto c = base_config(p, 2000);
    c.read = ReadPolicy::inconsistent(5);
    std::vector<DelaySchedule> schedules{
        DelaySchedule::bounded(4, 2), DelaySchedule::power_law(5.0, 20, 2),
        DelaySchedule::epsilon_sequence(EpsilonSpec::geometric(0.5), 4)};
    for (auto& s : schedules) {
        const auto a = run_stochastic(p, c, s);
        s.reset();
        const auto b = run_stochastic(p, c, s);
        ASSERT_EQ(a.trace.records, b.trace.records);
        ASSERT_EQ(a.x, b.x);
    }
}

TEST(Run, SynchronousReductionMatchesCoordinateDescent)
{
    Lasso l(50, 20, 0.1, 3);
    const auto d = [&] {
        auto o = oracle::densify(*l.data, oracle::Loss::quadratic, l.targets);
        o.lambda = 0.1;
        return o;
    }();
    SolverConfig c;
    c.eta = 1.0 / l.problem.lipschitz();
    c.seed = 11;
    const std::size_t R = 120;

    c.iterations = R;
    auto s0 = DelaySchedule::bounded(0, 1);
    const auto full = run_stochastic(l.problem, c, s0);
    std::vector<std::size_t> blocks;
    for (const auto& r : full.trace.records) blocks.push_back(r.block);
    const auto xs = oracle::sync_pcd(d, c.eta, blocks);

    for (std::size_t r = 1; r <= R; ++r) {
        c.iterations = r;
        auto s = DelaySchedule::bounded(0, 1);
        const auto res = run_stochastic(l.problem, c, s);
        for (std::size_t j = 0; j < 20; ++j) ASSERT_NEAR(res.x[j], xs[r][j], 1e-12) << r;
    }
}

TEST(Run, CyclicOrder)
{
    auto data = std::make_shared<const Dataset>(make_classification(20, 4, 1));
    ProblemSpec p(data, LossKind::logistic, Regularizer::l1(1e-3), 2);
    p.set_lipschitz(lipschitz_estimate(p));
    auto c = base_config(p, 4);
    auto s = DelaySchedule::bounded(0, 1);
    const auto r = run_deterministic(p, c, s);
    std::vector<std::size_t> got;
    for (const auto& rec : r.trace.records) got.push_back(rec.block);
    EXPECT_EQ(got, (std::vector<std::size_t>{0, 1, 0, 1}));
}

TEST(Run, CyclicWindowsCoverEveryBlock)
{
    auto p = logistic_capped();
    auto c = base_config(p, 500);
    auto s = DelaySchedule::bounded(4, 3);
    const auto r = run_deterministic(p, c, s);
    const std::size_t K = p.blocks().count();
    for (std::size_t start = 0; start + K <= r.trace.records.size(); ++start) {
        std::vector<bool> seen(K, false);
        for (std::size_t k = start; k < start + K; ++k) seen[r.trace.records[k].block] = true;
        ASSERT_TRUE(std::all_of(seen.begin(), seen.end(), [](bool b) { return b; }));
    }
}

TEST(Run, IncrementalObjectiveStaysConsistent)
{
    auto p = logistic_capped();
    auto c = base_config(p, 25'000);
    auto s = DelaySchedule::bounded(4, 8);
    const auto r = run_stochastic(p, c, s);
    EXPECT_NEAR(r.trace.records.back().F, r.objective, 1e-10 * std::abs(r.objective));
    EXPECT_LT(r.objective, r.trace.initial_objective);
    expect_acceptance_rule(r.trace);
}

TEST(Run, BlockNormWithWideBlocks)
{
    auto data = std::make_shared<const Dataset>(make_classification(40, 10, 4));
    ProblemSpec p(data, LossKind::sigmoid, Regularizer::block_norm(1e-3), 3);
    p.set_lipschitz(lipschitz_estimate(p));
    auto c = base_config(p, 400);
    auto s = DelaySchedule::bounded(4, 1);
    const auto r = run_stochastic(p, c, s);
    EXPECT_LT(r.objective, r.trace.initial_objective);
    for (const auto& rec : r.trace.records) ASSERT_LT(rec.block, 4u);
    expect_acceptance_rule(r.trace);
}

TEST(Run, EvictedHistoryIsAnError)
{
    auto p = logistic_capped();
    auto c = base_config(p, 10);
    c.history_capacity = 2;
    auto s = DelaySchedule::scripted({0, 0, 0, 0, 0, 5, 0, 0, 0, 0});
    EXPECT_THROW(run_stochastic(p, c, s), std::out_of_range);
}

TEST(Run, DivergenceIsReported)
{
    Lasso l(30, 6, 0.01, 2);
    auto c = base_config(l.problem, 500);
    c.eta = 1e4;
    auto s = DelaySchedule::bounded(0, 1);
    EXPECT_THROW(run_stochastic(l.problem, c, s), DivergenceError);
}

TEST(Run, ConfigValidation)
{
    SolverConfig c;
    EXPECT_THROW(c.validate(), std::invalid_argument);
    c.eta = 0.1;
    EXPECT_NO_THROW(c.validate());
    c.beta_neg = -1.0;
    EXPECT_THROW(c.validate(), std::invalid_argument);
    c.beta_neg = 0.1;
    EXPECT_THROW(c.validate(), std::invalid_argument);
    c.beta_neg = -0.1;
    c.workers = 0;
    EXPECT_THROW(c.validate(), std::invalid_argument);
}

TEST(Measured, WorkersProduceAContiguousTrace)
{
    auto p = logistic_capped();
    auto c = base_config(p, 3000);
    c.workers = 3;
    auto s = DelaySchedule::measured();
    const auto r = run_stochastic(p, c, s);
    ASSERT_EQ(r.trace.records.size(), 3000u);
    for (std::size_t k = 0; k < 3000; ++k) {
        ASSERT_EQ(r.trace.records[k].k, k);
        ASSERT_LE(r.trace.records[k].delay, k);
    }
    expect_acceptance_rule(r.trace);
    EXPECT_LT(r.objective, r.trace.initial_objective);
    EXPECT_EQ(r.workers, 3u);
}

TEST(Measured, SingleWorkerHasNoStaleness)
{
    auto p = logistic_capped();
    auto c = base_config(p, 500);
    auto s = DelaySchedule::measured();
    const auto r = run_stochastic(p, c, s);
    for (const auto& rec : r.trace.records) ASSERT_EQ(rec.delay, 0u);
}
