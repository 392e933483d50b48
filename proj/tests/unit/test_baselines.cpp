#include "aapcd/baselines.hpp"
#include "aapcd/parameters.hpp"
#include "aapcd/synthetic.hpp"

#include "../support/oracles.hpp"

#include <gtest/gtest.h>

#include <memory>

using namespace aapcd;

namespace {

struct Fixture {
    RegressionData reg;
    std::shared_ptr<const Dataset> data;
    ProblemSpec problem;
    oracle::Dense dense;

    Fixture(RegularizerKind kind, double lambda)
        : reg(make_regression(50, 20, 5, 0.1, 3)),
          data(std::make_shared<const Dataset>(reg.data)),
          problem(data, LossKind::quadratic,
                  kind == RegularizerKind::l1 ? Regularizer::l1(lambda) : Regularizer::none()),
          dense(oracle::densify(*data, oracle::Loss::quadratic, reg.targets))
    {
        problem.set_targets(reg.targets);
        problem.set_lipschitz(lipschitz_estimate(problem));
        dense.lambda = kind == RegularizerKind::l1 ? lambda : 0.0;
    }
};

} // namespace

TEST(Ascd, SynchronousMatchesCoordinateDescent)
{
    Fixture f(RegularizerKind::l1, 0.1);
    SolverConfig c;
    c.eta = 1.0 / f.problem.lipschitz();
    c.beta = 0.8; // ignored by ASCD
    c.beta_neg = -0.5;
    c.iterations = 300;
    c.seed = 2;
    auto s = DelaySchedule::bounded(0, 1);
    const auto r = run_ascd(f.problem, c, s);
    std::vector<std::size_t> blocks;
    for (const auto& rec : r.trace.records) {
        blocks.push_back(rec.block);
        ASSERT_EQ(rec.beta, 0.0);
        ASSERT_EQ(rec.branch, Branch::x);
    }
    const auto xs = oracle::sync_pcd(f.dense, c.eta, blocks);
    for (std::size_t j = 0; j < 20; ++j) EXPECT_NEAR(r.x[j], xs.back()[j], 1e-12);
}

TEST(Ascd, ReachesTheSameObjectiveAsAapcd)
{
    Fixture f(RegularizerKind::l1, 0.1);
    SolverConfig c;
    c.beta = 0.8;
    c.beta_neg = -0.08;
    c.t1 = 2;
    c.eta = stepsize_bounded_feasible(f.problem.lipschitz(), 2, 4, 0.8);
    c.iterations = 40'000;
    c.seed = 9;
    auto s1 = DelaySchedule::bounded(4, 1);
    auto s2 = DelaySchedule::bounded(4, 1);
    const auto a = run_stochastic(f.problem, c, s1);
    const auto b = run_ascd(f.problem, c, s2);
    EXPECT_NEAR(a.objective, b.objective, 1e-4);
}

TEST(Dspg, FullBatchWithoutRegularizerIsGradientDescent)
{
    Fixture f(RegularizerKind::none, 0.0);
    DspgConfig c;
    c.eta = 0.5 / f.problem.lipschitz();
    c.iterations = 1;
    const auto r = run_dspg(f.problem, c);
    const std::vector<double> zero(20, 0.0);
    for (std::size_t j = 0; j < 20; ++j)
        EXPECT_NEAR(r.x[j], -c.eta * oracle::quadratic_gradient(f.dense, zero, j), 1e-14);
}

TEST(Dspg, FullBatchL1IsIsta)
{
    Fixture f(RegularizerKind::l1, 0.1);
    DspgConfig c;
    c.eta = 1.0 / f.problem.lipschitz();
    c.iterations = 200;
    const auto r = run_dspg(f.problem, c);
    const auto ref = oracle::ista(f.dense, c.eta, 200);
    for (std::size_t j = 0; j < 20; ++j) EXPECT_NEAR(r.x[j], ref[j], 1e-12);
    EXPECT_NEAR(r.objective, oracle::objective(f.dense, ref), 1e-12);
    for (const auto& rec : r.trace.records) {
        ASSERT_EQ(rec.block, 0u);
        ASSERT_EQ(rec.delay, 0u);
    }
}

TEST(Dspg, SeededMiniBatchesReproduce)
{
    Fixture f(RegularizerKind::l1, 0.1);
    DspgConfig c;
    c.eta = 0.5 / f.problem.lipschitz();
    c.batch = 10;
    c.iterations = 100;
    c.seed = 4;
    const auto a = run_dspg(f.problem, c);
    const auto b = run_dspg(f.problem, c);
    EXPECT_EQ(a.trace.records, b.trace.records);
    c.seed = 5;
    EXPECT_NE(run_dspg(f.problem, c).x, a.x);
}

TEST(Dspg, Validation)
{
    DspgConfig c;
    EXPECT_THROW(c.validate(10), std::invalid_argument);
    c.eta = 0.1;
    c.batch = 11;
    EXPECT_THROW(c.validate(10), std::invalid_argument);
    c.batch = 10;
    EXPECT_NO_THROW(c.validate(10));
}
