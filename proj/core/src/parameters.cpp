#include "aapcd/parameters.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace aapcd {

namespace {

void require_lipschitz(double L)
{
    if (!(L > 0.0) || !std::isfinite(L))
        throw std::invalid_argument("Lipschitz constant must be positive and finite");
}

void require_safety(double safety)
{
    if (!(safety > 0.0 && safety <= 1.0))
        throw std::invalid_argument("stepsize safety factor must lie in (0, 1]");
}

} // namespace

double stepsize_bounded(double L, std::size_t t1, double beta, double safety)
{
    require_lipschitz(L);
    require_safety(safety);
    return safety / (L + 2.0 * L * static_cast<double>(t1) * (1.0 + beta));
}

double momentum_bound_bounded(double eta, double L, std::size_t tau)
{
    require_lipschitz(L);
    if (!(eta > 0.0)) throw std::invalid_argument("stepsize must be positive");
    if (tau == 0) throw std::invalid_argument("momentum bound needs tau >= 1");
    const double bound = (1.0 / (L * static_cast<double>(tau))) * (1.0 / (2.0 * eta) - L / 2.0) - 1.0;
    if (bound <= -1.0)
        throw InfeasibleError("stepsize too large for tau = " + std::to_string(tau) +
                              ": momentum bound " + std::to_string(bound) + " <= -1");
    return bound;
}

bool threshold_ok_bounded(std::size_t t1, std::size_t tau) { return 2 * t1 >= tau; }

std::size_t default_threshold(std::size_t tau) { return (tau + 1) / 2; }

std::size_t preset_threshold(std::size_t tau, double fraction)
{
    return static_cast<std::size_t>(std::lround(fraction * static_cast<double>(tau)));
}

double stepsize_bounded_feasible(double L, std::size_t t1, std::size_t tau, double beta,
                                 double safety)
{
    const double by_threshold = stepsize_bounded(L, t1, beta, 1.0);
    const double by_momentum = 1.0 / (L + 2.0 * L * static_cast<double>(tau) * (1.0 + beta));
    require_safety(safety);
    return safety * std::min(by_threshold, by_momentum);
}

double stepsize_unbounded_stochastic(double L, double c_t1, double beta, double safety)
{
    require_lipschitz(L);
    require_safety(safety);
    if (!(c_t1 >= 0.0)) throw std::invalid_argument("c_T1 must be nonnegative");
    return safety / (L + 2.0 * L * std::sqrt(c_t1) * (1.0 + beta));
}

double momentum_cap_unbounded_stochastic(double eta, double L, double c0)
{
    require_lipschitz(L);
    if (!(c0 > 0.0)) throw std::invalid_argument("c_0 must be positive");
    return (1.0 / (L * std::sqrt(c0))) * (1.0 / (2.0 * eta) - L / 2.0) - 1.0;
}

bool threshold_ok_stochastic(double c_t1, double c0) { return 4.0 * c_t1 >= c0; }

double stepsize_deterministic(double L, double delta0, double mu_t1, double beta, double c)
{
    require_lipschitz(L);
    if (!(c > 0.0 && c < 1.0)) throw std::invalid_argument("stepsize constant c must lie in (0, 1)");
    if (!(delta0 >= 0.0) || !(mu_t1 >= 0.0))
        throw std::invalid_argument("delta_0 and mu_T1 must be nonnegative");
    return c / (L + 2.0 * std::sqrt(delta0 * mu_t1) * L * (1.0 + beta));
}

double momentum_cap_deterministic(double mu_t1, double mu_d, double beta, double c)
{
    if (!(c > 0.0 && c < 1.0)) throw std::invalid_argument("stepsize constant c must lie in (0, 1)");
    if (mu_d == 0.0) return std::numeric_limits<double>::infinity();
    return std::sqrt(mu_t1) / (c * std::sqrt(mu_d)) * (1.0 + beta) - 1.0;
}

bool threshold_ok_deterministic(double mu_t1, double mu_d, double c)
{
    return mu_t1 >= c * c * mu_d;
}

double descent_coefficient_bounded(double eta, double L, std::size_t tau, double beta_k)
{
    return 1.0 / (2.0 * eta) - L / 2.0 - L * static_cast<double>(tau) * (1.0 + beta_k);
}

double descent_coefficient_stochastic(double eta, double L, double c0, double beta_k)
{
    return 1.0 / (2.0 * eta) - L / 2.0 - L * (1.0 + beta_k) * std::sqrt(c0);
}

double descent_coefficient_deterministic(double eta, double L, double delta0, double mu_d,
                                         double beta_k)
{
    return 1.0 / (2.0 * eta) - L / 2.0 - std::sqrt(delta0 * mu_d) * L * (1.0 + beta_k);
}

} // namespace aapcd
