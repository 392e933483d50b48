#include "aapcd/diagnostics.hpp"
#include "aapcd/parameters.hpp"
#include "aapcd/synthetic.hpp"

#include <gmock/gmock.h>
#include <gtest/gtest.h>

#include <cmath>
#include <memory>

using namespace aapcd;

namespace {

IterationTrace make_trace(double F0, std::vector<double> F, std::vector<double> steps,
                          std::size_t delay = 0, double beta = 0.0)
{
    IterationTrace t;
    t.initial_objective = F0;
    for (std::size_t k = 0; k < F.size(); ++k) {
        IterationRecord r;
        r.k = k;
        r.F = F[k];
        r.step_sq = steps[k];
        r.delay = delay;
        r.beta = beta;
        t.records.push_back(r);
    }
    return t;
}

} // namespace

TEST(Lyapunov, BoundedExample)
{
    const auto spec = LyapunovSpec::bounded(1.0, 2, 0.5);
    EXPECT_DOUBLE_EQ(spec.C, 3.0);
    const std::vector<double> steps{1.0, 1.0};
    EXPECT_NEAR(lyapunov_xi(steps, spec, 2), 1.0, 1e-15);
    EXPECT_NEAR(lyapunov_G(0.25, steps, spec, 2), 1.25, 1e-15);
    // s_1 only: weight tau = 2 on the most recent step
    EXPECT_NEAR(lyapunov_xi(steps, spec, 1), 2.0 / 3.0, 1e-15);
    EXPECT_THROW(lyapunov_xi(steps, spec, 3), std::out_of_range);
}

TEST(Lyapunov, ZeroStepsGiveF)
{
    const auto spec = LyapunovSpec::bounded(2.0, 5, 0.8);
    const std::vector<double> steps(10, 0.0);
    EXPECT_EQ(lyapunov_G(0.7, steps, spec, 10), 0.7);
}

TEST(Lyapunov, StochasticWeights)
{
    const auto c = c_table(DelayPmf::finite({0.0, 0.5, 0.5}), 3); // c = 2.5, 1, 0
    const auto spec = LyapunovSpec::stochastic(2.0, c, 0.5);
    const double C = 2.0 * 1.5 * std::sqrt(2.5);
    EXPECT_NEAR(spec.C, C, 1e-15);
    const std::vector<double> steps{4.0, 3.0, 2.0};
    // xi_3 = L^2/(2C) (c0 s3 + c1 s2 + c2 s1)
    EXPECT_NEAR(lyapunov_xi(steps, spec, 3), 4.0 / (2.0 * C) * (2.5 * 2.0 + 1.0 * 3.0), 1e-14);
}

TEST(Lyapunov, DeterministicWeights)
{
    const auto t = mu_delta_tables(EpsilonSpec::geometric(0.5), 4);
    const auto spec = LyapunovSpec::deterministic(1.0, t, 0.8, 3);
    EXPECT_NEAR(spec.C, 1.8 * std::sqrt(2.0 / 7.0), 1e-15);
    const std::vector<double> steps{1.0, 1.0};
    EXPECT_NEAR(lyapunov_xi(steps, spec, 2), (2.0 + 1.0) / (2.0 * spec.C), 1e-14);
}

TEST(Lyapunov, AnnotateMatchesSeries)
{
    auto t = make_trace(1.0, {0.9, 0.8, 0.75}, {0.1, 0.2, 0.05});
    const auto spec = LyapunovSpec::bounded(1.0, 2, 0.5);
    annotate_lyapunov(t, spec);
    const auto G = lyapunov_series(t, spec);
    ASSERT_EQ(G.size(), 4u);
    EXPECT_EQ(G[0], 1.0);
    for (std::size_t k = 0; k < 3; ++k) EXPECT_EQ(t.records[k].G, G[k + 1]);
}

TEST(Descent, BoundedCoefficientReducesToClosedForm)
{
    const auto spec = LyapunovSpec::bounded(2.0, 4, 0.5);
    const double beta_k = 0.5, eta = 0.01;
    EXPECT_NEAR(descent_coefficient(spec, eta, 4, (1 + beta_k) * (1 + beta_k)),
                descent_coefficient_bounded(eta, 2.0, 4, beta_k), 1e-12);
    EXPECT_EQ(descent_coefficient(spec, eta, 5, 1.0), -std::numeric_limits<double>::infinity());
    const auto c = c_table(DelayPmf::finite({0.0, 1.0}), 2);
    EXPECT_TRUE(std::isnan(descent_coefficient(LyapunovSpec::stochastic(1.0, c, 0.5), eta, 1, 1.0)));
}

TEST(Descent, ZeroStepIsNotAViolation)
{
    const auto t = make_trace(1.0, {1.0, 1.0}, {0.0, 0.0});
    const auto r = descent_check(t, LyapunovSpec::bounded(1.0, 2, 0.5), {0.1});
    EXPECT_TRUE(r.ok());
    EXPECT_EQ(r.checked, 2u);
}

TEST(Descent, IncreaseIsFlagged)
{
    const auto t = make_trace(1.0, {0.9, 0.95, 0.8}, {0.0, 0.0, 0.0});
    DescentOptions o;
    o.eta = 0.1;
    const auto r = descent_check(t, LyapunovSpec::bounded(1.0, 2, 0.5), o);
    ASSERT_EQ(r.increases, std::vector<std::size_t>{1});
    EXPECT_NEAR(r.worst_excess, 0.05, 1e-15);
    EXPECT_FALSE(r.ok());
}

TEST(Descent, InsufficientDecreaseIsFlagged)
{
    // G drops by 0.01 with ||x - y||^2 = 1: the coefficient 1/(2 eta) - L/2 = 4.5 demands 4.5.
    const auto t = make_trace(1.0, {0.99}, {1.0});
    DescentOptions o;
    o.eta = 0.1;
    const auto r = descent_check(t, LyapunovSpec::bounded(1.0, 0, 0.0), o);
    EXPECT_TRUE(r.increases.empty());
    EXPECT_EQ(r.quantitative, std::vector<std::size_t>{0});
    o.quantitative = false;
    EXPECT_TRUE(descent_check(t, LyapunovSpec::bounded(1.0, 0, 0.0), o).ok());
}

TEST(Descent, DelayBeyondBoundIsFlagged)
{
    const auto t = make_trace(1.0, {0.5}, {0.0}, 3);
    const auto r = descent_check(t, LyapunovSpec::bounded(1.0, 2, 0.5), {0.1});
    EXPECT_EQ(r.quantitative, std::vector<std::size_t>{0});
}

TEST(Expectation, DetectsDrift)
{
    std::vector<std::vector<double>> down, up;
    Rng rng(4);
    for (int s = 0; s < 20; ++s) {
        std::vector<double> a, b;
        for (int k = 0; k <= 400; ++k) {
            const double noise = 0.01 * (rng.uniform() - 0.5);
            a.push_back(1.0 / (1.0 + k) + noise);
            b.push_back(0.001 * k + noise);
        }
        down.push_back(a);
        up.push_back(b);
    }
    EXPECT_TRUE(expectation_check(down, 100).ok());
    const auto bad = expectation_check(up, 100);
    EXPECT_EQ(bad.failures, 4u);
    EXPECT_EQ(bad.checkpoints.size(), 4u);
}

TEST(Stationarity, FixedPointHasZeroResidual)
{
    auto r = make_regression(30, 6, 2, 0.1, 1);
    auto data = std::make_shared<const Dataset>(r.data);
    ProblemSpec p(data, LossKind::quadratic, Regularizer::l1(100.0));
    p.set_targets(r.targets);
    SolverConfig c;
    c.eta = 0.1;
    c.iterations = 60;
    auto s = DelaySchedule::bounded(0, 1);
    const auto res = run_stochastic(p, c, s);
    EXPECT_EQ(res.stationarity.max_norm, 0.0);
}

TEST(Stationarity, SmoothCaseEqualsGradientNorm)
{
    auto r = make_regression(40, 8, 3, 0.1, 2);
    auto data = std::make_shared<const Dataset>(r.data);
    ProblemSpec p(data, LossKind::quadratic, Regularizer::none());
    p.set_targets(r.targets);
    SolverConfig c;
    c.eta = 1.0 / lipschitz_estimate(p);
    c.iterations = 4000;
    auto s = DelaySchedule::bounded(3, 5);
    const auto res = run_stochastic(p, c, s);
    ASSERT_EQ(res.stationarity.never_updated, 0u);
    const auto g = full_gradient(p, res.x);
    double norm = 0.0;
    for (double v : g) norm += v * v;
    EXPECT_NEAR(res.stationarity.norm, std::sqrt(norm), 1e-8);
    EXPECT_LT(res.stationarity.max_norm, 1e-6);
}

TEST(Stationarity, NeverUpdatedBlocksAreCounted)
{
    auto data = std::make_shared<const Dataset>(make_classification(10, 3, 1));
    ProblemSpec p(data, LossKind::logistic, Regularizer::none());
    std::vector<BlockMemory> mem(3);
    const std::vector<double> y(3, 0.0);
    const auto rep = stationarity_residual(p, y, mem, 0.1);
    EXPECT_EQ(rep.never_updated, 3u);
    EXPECT_TRUE(std::isnan(rep.per_block[0]));
}

TEST(RateFit, Geometric)
{
    std::vector<double> r;
    for (int k = 0; k < 50; ++k) r.push_back(std::pow(0.5, k));
    const auto f = fit_rate(r, 0.5, 0, r.size());
    EXPECT_TRUE(f.linear);
    EXPECT_NEAR(f.contraction, 0.5, 1e-12);
    EXPECT_NEAR(f.r_squared, 1.0, 1e-12);
}

TEST(RateFit, PowerLaw)
{
    std::vector<double> r{1.0};
    for (int k = 1; k < 200; ++k) r.push_back(1.0 / (static_cast<double>(k) * k));
    const auto f = fit_rate(r, 0.25, 0, r.size());
    EXPECT_FALSE(f.linear);
    EXPECT_NEAR(f.exponent, -2.0, 1e-12);
    EXPECT_NEAR(f.r_squared, 1.0, 1e-12);
}

TEST(RateFit, TooFewPoints)
{
    const std::vector<double> r{1.0, 0.5, 0.25, 0.0, 0.0};
    EXPECT_THROW(fit_rate(r, 0.5, 0, r.size()), std::invalid_argument);
}

TEST(RateFit, ResidualSeriesDefaultsToBestSeen)
{
    const auto t = make_trace(2.0, {1.5, 1.0, 1.2}, {0, 0, 0});
    using ::testing::DoubleEq;
    EXPECT_THAT(residual_series(t), ::testing::ElementsAre(1.0, 0.5, 0.0, DoubleEq(0.2)));
    EXPECT_THAT(residual_series(t, 0.5), ::testing::ElementsAre(1.5, 1.0, 0.5, DoubleEq(0.7)));
}

TEST(RateConstantsTest, BoundedExample)
{
    RateConstants k;
    k.L = 1.0;
    k.eta = 0.1;
    k.K = 2;
    k.t1 = 1;
    k.T = 2;
    k.tau = 2;
    k.beta = 0.5;
    k.beta_neg = -0.08; // beta'' = 0
    EXPECT_EQ(beta_double_prime(k.beta_neg), 0.0);
    EXPECT_NEAR(b1_constant(RateRegime::bounded_stochastic, k), 733.0 / 1.5, 1e-10);
}

TEST(RateConstantsTest, DenominatorLimit)
{
    RateConstants k;
    k.L = 1.0;
    k.K = 2;
    k.t1 = 1;
    k.T = 2;
    k.tau = 2;
    k.beta = 0.5;
    // denominator 1/(2 eta) - 1/2 - 3 vanishes at eta = 1/7
    k.eta = 1.0 / 7.0 - 1e-9;
    EXPECT_GT(b1_constant(RateRegime::bounded_stochastic, k), 1e8);
    k.eta = 1.0 / 7.0 + 1e-9;
    EXPECT_THROW(b1_constant(RateRegime::bounded_stochastic, k), InfeasibleError);
}

TEST(RateConstantsTest, Derived)
{
    EXPECT_NEAR(linear_rate_bound(3.0, 1.0), 0.75, 1e-15);
    EXPECT_TRUE(finite_termination(0.1, 2.0, 2.0));
    EXPECT_FALSE(finite_termination(0.2, 2.0, 2.0));
    // theta = 1/4: second branch r0^{-1/2} (R^{1/3} - 1) / (1/2)
    EXPECT_NEAR(b2_constant(1e-6, 1.0, 8.0, 4.0, 0.25), 0.5 * (2.0 - 1.0) / 0.5, 1e-12);
    EXPECT_NEAR(b2_constant(10.0, 1.0, 8.0, 4.0, 0.25), 1.0 / 80.0, 1e-15);
    EXPECT_THROW(b2_constant(1.0, 1.0, 8.0, 4.0, 0.5), std::invalid_argument);
}
