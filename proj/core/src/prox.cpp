#include "aapcd/prox.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace aapcd {

void ProxQuery::validate() const
{
    if (!(step > 0.0)) throw std::invalid_argument("prox: step must be positive");
    if (!(lambda >= 0.0)) throw std::invalid_argument("prox: lambda must be nonnegative");
}

double prox_l1(const ProxQuery& q)
{
    q.validate();
    const double t = q.step * q.lambda;
    const double mag = std::abs(q.point) - t;
    return mag > 0.0 ? std::copysign(mag, q.point) : 0.0;
}

double prox_tie_tolerance(double objective)
{
    return 1e-12 * std::max(1.0, std::abs(objective));
}

double prox_capped_l1(const ProxQuery& q)
{
    q.validate();
    if (!(q.cap > 0.0)) throw std::invalid_argument("prox_capped_l1: cap must be positive");
    if (q.lambda == 0.0) return q.point;

    const double y = q.point;
    const double inner = std::clamp(prox_l1(q), -q.cap, q.cap);
    const double outer = std::copysign(std::max(std::abs(y), q.cap), y);

    const auto objective = [&](double x) {
        const double d = x - y;
        return d * d / (2.0 * q.step) + q.lambda * std::min(std::abs(x), q.cap);
    };
    const double f_inner = objective(inner);
    const double f_outer = objective(outer);
    // |inner| <= cap <= |outer|, so a tie keeps the inner candidate.
    return f_outer < f_inner - prox_tie_tolerance(f_inner) ? outer : inner;
}

void prox_block_norm(std::span<const double> in, std::span<double> out, double step,
                     double lambda)
{
    if (!(step > 0.0)) throw std::invalid_argument("prox: step must be positive");
    double norm_sq = 0.0;
    for (double v : in) norm_sq += v * v;
    const double norm = std::sqrt(norm_sq);
    const double t = step * lambda;
    const double scale = norm > t ? 1.0 - t / norm : 0.0;
    for (std::size_t i = 0; i < in.size(); ++i) out[i] = scale * in[i];
}

double prox_objective(const ScalarRegularizer& g, const ProxQuery& q, double x)
{
    const double d = x - q.point;
    return d * d / (2.0 * q.step) + g(x);
}

double prox_oracle_grid(const ScalarRegularizer& g, const ProxQuery& q, double lo, double hi,
                        double grid_step)
{
    q.validate();
    if (!(lo < hi) || !(grid_step > 0.0))
        throw std::invalid_argument("prox_oracle_grid: empty grid");
    const auto count = static_cast<std::size_t>(std::floor((hi - lo) / grid_step + 1e-9)) + 1;

    double best_x = lo;
    double best_f = prox_objective(g, q, lo);
    for (std::size_t i = 1; i < count; ++i) {
        const double x = lo + static_cast<double>(i) * grid_step;
        const double f = prox_objective(g, q, x);
        const double tol = prox_tie_tolerance(best_f);
        if (f < best_f - tol || (f <= best_f + tol && std::abs(x) < std::abs(best_x))) {
            best_x = x;
            best_f = std::min(f, best_f);
        }
    }
    return best_x;
}

double prox_oracle_grid(const ScalarRegularizer& g, const ProxQuery& q, double grid_step)
{
    const double r = 2.0 * std::abs(q.point) + 1.0;
    return prox_oracle_grid(g, q, -r, r, grid_step);
}

} // namespace aapcd
