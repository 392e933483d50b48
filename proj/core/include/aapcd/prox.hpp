#pragma once

#include <functional>
#include <span>

namespace aapcd {

/// One scalar proximal problem: argmin_x (1/(2 step)) (x - point)^2 + g(x).
struct ProxQuery {
    double point = 0.0;
    double step = 1.0;   ///< eta > 0
    double lambda = 0.0; ///< >= 0
    double cap = 0.0;    ///< capped-L1 threshold, > 0 where used

    void validate() const;
};

using ScalarRegularizer = std::function<double(double)>;

/// sign(y) max(|y| - eta lambda, 0)
double prox_l1(const ProxQuery& q);

/// Exact minimizer for g(x) = lambda min(|x|, cap). The inner candidate
/// clamp(soft(y), -cap, cap) and the outer candidate sign(y) max(|y|, cap)
/// are compared by objective; near-ties go to the smaller |x|.
double prox_capped_l1(const ProxQuery& q);

/// out = max(0, 1 - eta lambda / ||in||) in
void prox_block_norm(std::span<const double> in, std::span<double> out, double step,
                     double lambda);

/// (1/(2 step)) (x - point)^2 + g(x)
double prox_objective(const ScalarRegularizer& g, const ProxQuery& q, double x);

/// Tolerance under which two prox objective values count as tied.
double prox_tie_tolerance(double objective);

/// Exhaustive search over {lo, lo + step, ..., hi}; ties go to the smallest
/// |x|. Throws std::invalid_argument for an empty grid.
double prox_oracle_grid(const ScalarRegularizer& g, const ProxQuery& q, double lo, double hi,
                        double grid_step);

/// Grid oracle over [-(2|y|+1), 2|y|+1], which always encloses the minimizer.
double prox_oracle_grid(const ScalarRegularizer& g, const ProxQuery& q, double grid_step = 1e-4);

} // namespace aapcd
