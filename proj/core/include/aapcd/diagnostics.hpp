#pragma once

#include "aapcd/delays.hpp"
#include "aapcd/solver.hpp"

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

namespace aapcd {

// --- Lyapunov function -----------------------------------------------------------

/// xi_k = scale * sum_{i >= 0} weights[i] * s_{k-i}, s_h = ||y^h - y^{h-1}||^2:
///   bounded        weights tau - i (i < tau), scale L^2 tau / (2C), C = L tau (1 + beta)
///   stochastic     weights c_i,               scale L^2 / (2C),     C = L (1 + beta) sqrt(c_0)
///   deterministic  weights delta_i,           scale L^2 / (2C),     C = L (1 + beta) sqrt(delta_0 / mu_D)
/// where D is the largest delay the run can produce.
struct LyapunovSpec {
    Regime regime = Regime::bounded;
    double L = 0.0;
    double beta = 0.0;
    double C = 0.0;
    double scale = 0.0;
    std::vector<double> weights;
    std::size_t tau = 0;    ///< bounded: delay bound
    std::size_t max_delay = 0;
    std::vector<double> mu; ///< deterministic: mu_d for d <= max_delay

    static LyapunovSpec bounded(double L, std::size_t tau, double beta);
    static LyapunovSpec stochastic(double L, const CTable& c, double beta);
    /// Needs tables.delta and tables.mu to reach max_delay.
    static LyapunovSpec deterministic(double L, const MuDeltaTables& tables, double beta,
                                      std::size_t max_delay);
};

/// xi_k from s_1..s_n stored as step_sq[h-1]. Throws std::out_of_range when
/// k > step_sq.size().
double lyapunov_xi(std::span<const double> step_sq, const LyapunovSpec& spec, std::size_t k);

/// F(y^k) + xi_k
double lyapunov_G(double F, std::span<const double> step_sq, const LyapunovSpec& spec,
                  std::size_t k);

/// G(y^0), .., G(y^R) along a trace (G(y^0) = F(y^0)).
std::vector<double> lyapunov_series(const IterationTrace& trace, const LyapunovSpec& spec);

/// Fills xi and G of every record (record k describes y^{k+1}).
void annotate_lyapunov(IterationTrace& trace, const LyapunovSpec& spec);

// --- descent ---------------------------------------------------------------------

/// Per-iteration guarantee G(y^k) - G(y^{k+1}) >= coefficient * ||x^{k+1} - y^k||^2
/// for the spec's Lyapunov function, with ratio = ||y^{k+1} - y^k||^2 / ||x^{k+1} - y^k||^2:
///   bounded        1/(2 eta) - L/2 - C d/(2 tau) - (L^2 tau^2 / (2C)) ratio    (d <= tau)
///   deterministic  1/(2 eta) - L/2 - C mu_d / 2 - (L^2 delta_0 / (2C)) ratio   (d <= D)
/// -inf when d is outside the spec's range; NaN for the stochastic regime,
/// whose descent only holds in expectation.
double descent_coefficient(const LyapunovSpec& spec, double eta, std::size_t delay, double ratio);

struct DescentOptions {
    double eta = 0.0;
    double relative_tolerance = 1e-12; ///< times |G(y^0)|
    bool quantitative = true;
};

struct DescentReport {
    std::size_t checked = 0;
    double tolerance = 0.0;
    std::vector<std::size_t> increases;     ///< k with G(y^{k+1}) > G(y^k) + tol
    std::vector<std::size_t> quantitative;  ///< k where the coefficient bound fails
    std::vector<std::size_t> nonpositive;   ///< k whose coefficient is <= 0
    double worst_excess = 0.0;              ///< max of G(y^{k+1}) - G(y^k)

    bool ok() const { return increases.empty() && quantitative.empty(); }
};

/// Recomputes G from F and step_sq (the xi/G columns are not trusted).
/// ||x^{k+1} - y^k||^2 is recovered as step_sq / (1 + beta_k)^2 on v branches.
DescentReport descent_check(const IterationTrace& trace, const LyapunovSpec& spec,
                            const DescentOptions& options);

struct ExpectationCheckpoint {
    std::size_t k = 0;
    double mean = 0.0;      ///< mean G(y^k) over seeds
    double mean_diff = 0.0; ///< mean of G(y^k) - G(y^{k - stride}) over seeds
    double se = 0.0;        ///< standard error of that difference
    bool ok = true;         ///< mean_diff <= z * se
};

struct ExpectationReport {
    std::vector<ExpectationCheckpoint> checkpoints;
    std::size_t failures = 0;
    bool ok() const { return failures == 0; }
};

/// Seed-averaged monotonicity of G: series[s][k] = G(y^k) for seed s, all of
/// equal length. Differences are paired within each seed.
ExpectationReport expectation_check(std::span<const std::vector<double>> series,
                                    std::size_t stride, double z = 2.0);

// --- stationarity ------------------------------------------------------------------

/// q_B = grad_B f(y) - grad_B f(y_hat) - (1/eta)(x_B - y_B) from each block's
/// last update; its norm bounds dist(0, dF) on blocks whose last accepted
/// point was x.
StationarityReport stationarity_residual(const ProblemSpec& problem, std::span<const double> y,
                                         std::span<const BlockMemory> memory, double eta);

// --- rates ---------------------------------------------------------------------------

/// r_k = F(y^k) - F*, k = 0..R. F* defaults to the smallest F in the trace.
std::vector<double> residual_series(const IterationTrace& trace,
                                    std::optional<double> f_star = std::nullopt);

struct RateFitReport {
    double theta = 0.5;
    bool linear = true;      ///< theta >= 1/2: log r against k; else log r against log k
    double slope = 0.0;
    double intercept = 0.0;
    double contraction = 0.0; ///< exp(slope), linear fits
    double exponent = 0.0;    ///< slope, log-log fits
    double r_squared = 0.0;
    std::size_t points = 0;
};

/// Least squares over the positive r_k with first <= k < last. Throws
/// std::invalid_argument with fewer than 10 usable points.
RateFitReport fit_rate(std::span<const double> r, double theta, std::size_t first,
                       std::size_t last);

enum class RateRegime {
    bounded_stochastic,      ///< b1 with (K+1), T1, T and tau
    unbounded_stochastic,    ///< b1 with c_0
    deterministic_unbounded, ///< b1 with (1/c - 1) L/2
    deterministic_bounded,   ///< b1 with the mu_T delta_0 term
};

struct RateConstants {
    double L = 0.0;
    double eta = 0.0;
    double beta = 0.0;
    double beta_neg = 0.0;
    std::size_t K = 0;  ///< blocks
    std::size_t t1 = 0;
    std::size_t T = 0;  ///< delay bound; the bounded-delay b1 reads tau here
    std::size_t tau = 0;
    double c0 = 0.0;
    double c = 0.5;     ///< stepsize constant of the deterministic stepsize
    double delta0 = 0.0;
    double mu_T = 0.0;
};

/// max(beta_neg, 0), the factor the rate constants use for high delays.
double beta_double_prime(double beta_neg);

/// Throws InfeasibleError when the denominator is not positive.
double b1_constant(RateRegime regime, const RateConstants& k);

/// min(1/(b1 e^2 R), r0^{2 theta - 1} (R^{(2 theta - 1)/(2 theta - 2)} - 1) / (1 - 2 theta)),
/// R > 1, theta in (0, 1/2).
double b2_constant(double b1, double e, double R, double r0, double theta);

/// theta = 1: r_0 < 1/(b1 e^2) implies termination in finitely many steps.
bool finite_termination(double r0, double b1, double e);

/// b1 e^2 / (1 + b1 e^2), the per-step bound on r_{k+1}/r_0 at theta = 1/2.
double linear_rate_bound(double b1, double e);

} // namespace aapcd
