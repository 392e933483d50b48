#pragma once

#include <cstddef>
#include <stdexcept>

namespace aapcd {

/// Raised when a requested stepsize/momentum combination has no feasible value.
class InfeasibleError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

// Bounded delays (d_k <= tau).

/// safety / (L + 2 L T1 (1 + beta))
double stepsize_bounded(double L, std::size_t t1, double beta, double safety = 0.95);

/// (1/(L tau)) (1/(2 eta) - L/2) - 1. Throws InfeasibleError when <= -1.
double momentum_bound_bounded(double eta, double L, std::size_t tau);

/// Threshold rule T1 >= tau/2 that makes the stepsize bound compatible with
/// the momentum bound.
bool threshold_ok_bounded(std::size_t t1, std::size_t tau);

/// ceil(tau / 2)
std::size_t default_threshold(std::size_t tau);

/// 0.9 tau rounded to nearest.
std::size_t preset_threshold(std::size_t tau, double fraction = 0.9);

/// Largest stepsize below both the stepsize bound for T1 and the value at
/// which beta meets the momentum bound for tau, times `safety`.
double stepsize_bounded_feasible(double L, std::size_t t1, std::size_t tau, double beta,
                                 double safety = 0.95);

// Unbounded stochastic delays, via c_k.

/// safety / (L + 2 L sqrt(c_T1) (1 + beta))
double stepsize_unbounded_stochastic(double L, double c_t1, double beta, double safety = 0.95);

/// (1/(L sqrt(c_0))) (1/(2 eta) - L/2) - 1
double momentum_cap_unbounded_stochastic(double eta, double L, double c0);

/// c_T1 >= c_0 / 4: with eta = 1/(L + 4 L sqrt(c_T1)(1+beta)) the momentum cap
/// then reaches beta.
bool threshold_ok_stochastic(double c_t1, double c0);

// Deterministic unbounded delays, via delta_0 and mu_d.

/// c / (L + 2 sqrt(delta_0 mu_T1) L (1 + beta)), c in (0, 1).
double stepsize_deterministic(double L, double delta0, double mu_t1, double beta, double c);

/// sqrt(mu_T1) / (c sqrt(mu_d)) (1 + beta) - 1, the cap on beta_k at delay d.
double momentum_cap_deterministic(double mu_t1, double mu_d, double beta, double c);

/// mu_T1 >= c^2 mu_d; at beta = 1 this is exactly cap(d) >= beta.
bool threshold_ok_deterministic(double mu_t1, double mu_d, double c);

// Sufficient-descent coefficients in their closed forms. All are
// strictly decreasing in beta_k.

/// 1/(2 eta) - L/2 - L tau (1 + beta_k)
double descent_coefficient_bounded(double eta, double L, std::size_t tau, double beta_k);
/// 1/(2 eta) - L/2 - L (1 + beta_k) sqrt(c_0)
double descent_coefficient_stochastic(double eta, double L, double c0, double beta_k);
/// 1/(2 eta) - L/2 - sqrt(delta_0 mu_d) L (1 + beta_k)
double descent_coefficient_deterministic(double eta, double L, double delta0, double mu_d,
                                         double beta_k);

} // namespace aapcd
