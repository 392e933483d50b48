#include "aapcd/diagnostics.hpp"

#include "aapcd/parameters.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace aapcd {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr double kInf = std::numeric_limits<double>::infinity();

void require_positive(double v, const char* what)
{
    if (!(v > 0.0) || !std::isfinite(v))
        throw std::invalid_argument(std::string(what) + " must be positive and finite");
}

std::vector<double> steps_of(const IterationTrace& trace)
{
    std::vector<double> s(trace.records.size());
    for (std::size_t k = 0; k < s.size(); ++k) s[k] = trace.records[k].step_sq;
    return s;
}

} // namespace

// --- Lyapunov function -----------------------------------------------------------

LyapunovSpec LyapunovSpec::bounded(double L, std::size_t tau, double beta)
{
    require_positive(L, "L");
    LyapunovSpec s;
    s.regime = Regime::bounded;
    s.L = L;
    s.beta = beta;
    s.tau = tau;
    s.max_delay = tau;
    if (tau == 0) return s; // no staleness, no history term
    const double t = static_cast<double>(tau);
    s.C = L * t * (1.0 + beta);
    s.scale = L * L * t / (2.0 * s.C);
    s.weights.resize(tau);
    for (std::size_t i = 0; i < tau; ++i) s.weights[i] = static_cast<double>(tau - i);
    return s;
}

LyapunovSpec LyapunovSpec::stochastic(double L, const CTable& c, double beta)
{
    require_positive(L, "L");
    if (c.c.empty() || !(c.c[0] > 0.0)) throw std::invalid_argument("Lyapunov: c_0 must be positive");
    LyapunovSpec s;
    s.regime = Regime::stochastic_unbounded;
    s.L = L;
    s.beta = beta;
    s.C = L * (1.0 + beta) * std::sqrt(c.c[0]);
    s.scale = L * L / (2.0 * s.C);
    s.weights = c.c;
    return s;
}

LyapunovSpec LyapunovSpec::deterministic(double L, const MuDeltaTables& tables, double beta,
                                         std::size_t max_delay)
{
    require_positive(L, "L");
    if (tables.mu.size() <= max_delay || tables.delta.size() <= max_delay)
        throw std::invalid_argument("Lyapunov: mu/delta tables do not reach the delay bound");
    LyapunovSpec s;
    s.regime = Regime::deterministic_unbounded;
    s.L = L;
    s.beta = beta;
    s.max_delay = max_delay;
    s.mu.assign(tables.mu.begin(), tables.mu.begin() + static_cast<std::ptrdiff_t>(max_delay + 1));
    if (max_delay == 0) return s;
    const double mu_D = tables.mu[max_delay];
    if (!std::isfinite(mu_D)) throw std::invalid_argument("Lyapunov: eps vanishes before the delay bound");
    s.C = L * (1.0 + beta) * std::sqrt(tables.delta[0] / mu_D);
    s.scale = L * L / (2.0 * s.C);
    s.weights = tables.delta;
    return s;
}

double lyapunov_xi(std::span<const double> step_sq, const LyapunovSpec& spec, std::size_t k)
{
    if (k > step_sq.size())
        throw std::out_of_range("lyapunov_xi: history ends at " + std::to_string(step_sq.size()) +
                                ", asked for " + std::to_string(k));
    double acc = 0.0;
    const std::size_t window = std::min(spec.weights.size(), k);
    for (std::size_t i = 0; i < window; ++i) acc += spec.weights[i] * step_sq[k - i - 1];
    return spec.scale * acc;
}

double lyapunov_G(double F, std::span<const double> step_sq, const LyapunovSpec& spec,
                  std::size_t k)
{
    return F + lyapunov_xi(step_sq, spec, k);
}

std::vector<double> lyapunov_series(const IterationTrace& trace, const LyapunovSpec& spec)
{
    const auto s = steps_of(trace);
    std::vector<double> G(s.size() + 1);
    G[0] = trace.initial_objective;
    for (std::size_t k = 0; k < s.size(); ++k)
        G[k + 1] = lyapunov_G(trace.records[k].F, s, spec, k + 1);
    return G;
}

void annotate_lyapunov(IterationTrace& trace, const LyapunovSpec& spec)
{
    const auto s = steps_of(trace);
    for (std::size_t k = 0; k < s.size(); ++k) {
        auto& r = trace.records[k];
        r.xi = lyapunov_xi(s, spec, k + 1);
        r.G = r.F + r.xi;
    }
}

// --- descent ---------------------------------------------------------------------

double descent_coefficient(const LyapunovSpec& spec, double eta, std::size_t delay, double ratio)
{
    const double base = 1.0 / (2.0 * eta) - spec.L / 2.0;
    switch (spec.regime) {
    case Regime::bounded: {
        if (delay > spec.tau) return -kInf;
        if (spec.tau == 0) return base;
        const double t = static_cast<double>(spec.tau);
        return base - spec.C * static_cast<double>(delay) / (2.0 * t) -
               spec.L * spec.L * t * t / (2.0 * spec.C) * ratio;
    }
    case Regime::deterministic_unbounded: {
        if (delay > spec.max_delay) return -kInf;
        if (spec.max_delay == 0) return base;
        return base - spec.C * spec.mu[delay] / 2.0 -
               spec.L * spec.L * spec.weights[0] / (2.0 * spec.C) * ratio;
    }
    case Regime::stochastic_unbounded: return kNaN;
    }
    return kNaN;
}

DescentReport descent_check(const IterationTrace& trace, const LyapunovSpec& spec,
                            const DescentOptions& options)
{
    if (!std::isfinite(trace.initial_objective))
        throw std::invalid_argument("descent_check: trace lacks the initial objective");
    if (options.quantitative) require_positive(options.eta, "eta");
    const auto G = lyapunov_series(trace, spec);

    DescentReport report;
    report.tolerance = options.relative_tolerance * std::abs(G[0]);
    report.worst_excess = -kInf;
    for (std::size_t k = 0; k < trace.records.size(); ++k) {
        const auto& r = trace.records[k];
        const double excess = G[k + 1] - G[k];
        report.worst_excess = std::max(report.worst_excess, excess);
        if (excess > report.tolerance) report.increases.push_back(k);
        ++report.checked;
        if (!options.quantitative) continue;

        const double ratio = r.branch == Branch::v ? (1.0 + r.beta) * (1.0 + r.beta) : 1.0;
        const double coef = descent_coefficient(spec, options.eta, r.delay, ratio);
        if (std::isnan(coef)) continue;
        if (coef <= 0.0) report.nonpositive.push_back(k);
        const double delta_sq = ratio > 0.0 ? r.step_sq / ratio : 0.0;
        const bool fails = coef == -kInf ? true : (G[k] - G[k + 1] < coef * delta_sq - report.tolerance);
        if (fails) report.quantitative.push_back(k);
    }
    if (trace.records.empty()) report.worst_excess = 0.0;
    return report;
}

ExpectationReport expectation_check(std::span<const std::vector<double>> series,
                                    std::size_t stride, double z)
{
    if (series.size() < 2) throw std::invalid_argument("expectation_check: need at least two seeds");
    if (stride == 0) throw std::invalid_argument("expectation_check: stride must be positive");
    const std::size_t len = series[0].size();
    for (const auto& s : series)
        if (s.size() != len) throw std::invalid_argument("expectation_check: series lengths differ");

    const double S = static_cast<double>(series.size());
    ExpectationReport report;
    for (std::size_t k = stride; k < len; k += stride) {
        ExpectationCheckpoint cp;
        cp.k = k;
        double mean = 0.0, mean_diff = 0.0;
        for (const auto& s : series) {
            mean += s[k];
            mean_diff += s[k] - s[k - stride];
        }
        mean /= S;
        mean_diff /= S;
        double var = 0.0;
        for (const auto& s : series) {
            const double d = (s[k] - s[k - stride]) - mean_diff;
            var += d * d;
        }
        var /= (S - 1.0);
        cp.mean = mean;
        cp.mean_diff = mean_diff;
        cp.se = std::sqrt(var / S);
        cp.ok = mean_diff <= z * cp.se;
        if (!cp.ok) ++report.failures;
        report.checkpoints.push_back(cp);
    }
    return report;
}

// --- stationarity ------------------------------------------------------------------

StationarityReport stationarity_residual(const ProblemSpec& problem, std::span<const double> y,
                                         std::span<const BlockMemory> memory, double eta)
{
    require_positive(eta, "eta");
    const auto& blocks = problem.blocks();
    if (memory.size() != blocks.count())
        throw std::invalid_argument("stationarity_residual: one memory entry per block required");
    if (y.size() != problem.dimension())
        throw std::invalid_argument("stationarity_residual: dimension mismatch");

    std::vector<double> z(problem.data().rows());
    problem.data().multiply(y, z);

    StationarityReport report;
    report.per_block.assign(blocks.count(), kNaN);
    double total = 0.0;
    std::vector<double> grad;
    for (std::size_t b = 0; b < blocks.count(); ++b) {
        const auto& mem = memory[b];
        if (!mem.updated) {
            ++report.never_updated;
            continue;
        }
        grad.resize(blocks.size(b));
        block_gradient_from_residual(problem, z, b, grad);
        double sq = 0.0;
        for (std::size_t c = 0; c < grad.size(); ++c) {
            const double q = grad[c] - mem.delayed_gradient[c] - mem.prox_step[c] / eta;
            sq += q * q;
        }
        report.per_block[b] = std::sqrt(sq);
        report.max_norm = std::max(report.max_norm, report.per_block[b]);
        total += sq;
    }
    report.norm = std::sqrt(total);
    return report;
}

// --- rates ---------------------------------------------------------------------------

std::vector<double> residual_series(const IterationTrace& trace, std::optional<double> f_star)
{
    double best = trace.initial_objective;
    for (const auto& r : trace.records) best = std::min(best, r.F);
    const double ref = f_star.value_or(best);
    std::vector<double> out;
    out.reserve(trace.records.size() + 1);
    out.push_back(trace.initial_objective - ref);
    for (const auto& r : trace.records) out.push_back(r.F - ref);
    return out;
}

RateFitReport fit_rate(std::span<const double> r, double theta, std::size_t first,
                       std::size_t last)
{
    if (!(theta > 0.0 && theta <= 1.0)) throw std::invalid_argument("fit_rate: theta must lie in (0, 1]");
    last = std::min(last, r.size());
    RateFitReport report;
    report.theta = theta;
    report.linear = theta >= 0.5;

    std::vector<double> xs, ys;
    for (std::size_t k = first; k < last; ++k) {
        if (!(r[k] > 0.0) || !std::isfinite(r[k])) continue;
        if (!report.linear && k == 0) continue;
        xs.push_back(report.linear ? static_cast<double>(k) : std::log(static_cast<double>(k)));
        ys.push_back(std::log(r[k]));
    }
    if (xs.size() < 10)
        throw std::invalid_argument("fit_rate: fewer than 10 positive residuals in the window");

    const double n = static_cast<double>(xs.size());
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        mx += xs[i];
        my += ys[i];
    }
    mx /= n;
    my /= n;
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        sxx += (xs[i] - mx) * (xs[i] - mx);
        sxy += (xs[i] - mx) * (ys[i] - my);
        syy += (ys[i] - my) * (ys[i] - my);
    }
    report.slope = sxy / sxx;
    report.intercept = my - report.slope * mx;
    double ss_res = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double e = ys[i] - (report.intercept + report.slope * xs[i]);
        ss_res += e * e;
    }
    report.r_squared = syy > 0.0 ? 1.0 - ss_res / syy : (ss_res == 0.0 ? 1.0 : 0.0);
    report.contraction = report.linear ? std::exp(report.slope) : kNaN;
    report.exponent = report.linear ? kNaN : report.slope;
    report.points = xs.size();
    return report;
}

double beta_double_prime(double beta_neg) { return std::max(beta_neg, 0.0); }

double b1_constant(RateRegime regime, const RateConstants& c)
{
    require_positive(c.L, "L");
    require_positive(c.eta, "eta");
    const double L = c.L, L2 = c.L * c.L, eta = c.eta;
    const double bp = 1.0 + c.beta;
    const double bpp = 1.0 + beta_double_prime(c.beta_neg);
    const double T1 = static_cast<double>(c.t1);
    const double T = static_cast<double>(c.T);
    const double inv = 1.0 / eta + L;

    double num = 0.0, den = 0.0;
    switch (regime) {
    case RateRegime::bounded_stochastic:
        num = 2.0 * inv * inv * static_cast<double>(c.K + 1) + 2.0 * L2 * T1 * bp + 2.0 * L2 * T * bpp;
        den = 1.0 / (2.0 * eta) - L / 2.0 - L * static_cast<double>(c.tau) * bp;
        break;
    case RateRegime::unbounded_stochastic:
        num = (2.0 / (eta * eta) + 4.0 * L2) + 4.0 * L2 + 4.0 * L2 * c.c0 * bp;
        den = 1.0 / (2.0 * eta) - L / 2.0 - L * bp * std::sqrt(c.c0);
        break;
    case RateRegime::deterministic_unbounded:
        num = 2.0 * inv * inv + 3.0 * bp * bp * L2 * T1 + 2.0 * bpp * bpp * L2 * T;
        den = (1.0 / c.c - 1.0) * L / 2.0;
        break;
    case RateRegime::deterministic_bounded:
        num = 3.0 * (inv * inv + bp * bp * L2 * T1 + bpp * bpp * L2 * T +
                     2.0 * bp * bp * L2 * c.mu_T * c.delta0);
        den = (1.0 / c.c - 1.0) * L / 2.0;
        break;
    }
    if (!(den > 0.0))
        throw InfeasibleError("b1: denominator " + std::to_string(den) +
                              " is not positive; the configuration is outside the rate bound's range");
    return num / den;
}

double b2_constant(double b1, double e, double R, double r0, double theta)
{
    if (!(theta > 0.0 && theta < 0.5)) throw std::invalid_argument("b2: theta must lie in (0, 1/2)");
    if (!(R > 1.0)) throw std::invalid_argument("b2: R must exceed 1");
    require_positive(b1, "b1");
    require_positive(e, "e");
    require_positive(r0, "r0");
    const double a = 1.0 / (b1 * e * e * R);
    const double p = 2.0 * theta - 1.0;
    const double b = std::pow(r0, p) * (std::pow(R, p / (2.0 * theta - 2.0)) - 1.0) / (1.0 - 2.0 * theta);
    return std::min(a, b);
}

bool finite_termination(double r0, double b1, double e) { return r0 < 1.0 / (b1 * e * e); }

double linear_rate_bound(double b1, double e)
{
    const double t = b1 * e * e;
    return t / (1.0 + t);
}

} // namespace aapcd
