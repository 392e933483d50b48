#include "aapcd/baselines.hpp"

#include "aapcd/diagnostics.hpp"
#include "engine.hpp"

#include <chrono>
#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

namespace aapcd {

SolveResult run_ascd(const ProblemSpec& problem, const SolverConfig& config,
                     DelaySchedule& schedule, std::span<const double> x0)
{
    auto plain = config;
    plain.beta = 0.0;
    plain.beta_neg = 0.0;
    return run_stochastic(problem, plain, schedule, x0);
}

void DspgConfig::validate(std::size_t rows) const
{
    if (!(eta > 0.0) || !std::isfinite(eta)) throw std::invalid_argument("eta must be positive");
    if (batch > rows) throw std::invalid_argument("batch larger than the sample count");
}

SolveResult run_dspg(const ProblemSpec& problem, const DspgConfig& config,
                     std::span<const double> x0)
{
    using clock = std::chrono::steady_clock;
    const auto start = clock::now();
    const auto& data = problem.data();
    const auto& blocks = problem.blocks();
    const std::size_t n = data.rows();
    const std::size_t m = problem.dimension();
    config.validate(n);
    const std::size_t batch = config.batch == 0 ? n : config.batch;

    auto x = detail::initial_point(problem, x0);
    std::vector<double> z(n), grad(m), in(m), next(m);
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    Rng rng(config.seed);

    SolveResult result;
    result.trace.initial_objective = full_objective(problem, x);
    const double limit =
        config.divergence_factor * std::max(std::abs(result.trace.initial_objective), 1.0);
    result.trace.records.reserve(config.iterations);

    for (std::size_t k = 0; k < config.iterations; ++k) {
        data.multiply(x, z);
        if (batch < n) {
            // first `batch` entries of a partial Fisher-Yates shuffle
            for (std::size_t i = 0; i < batch; ++i) std::swap(order[i], order[i + rng.index(n - i)]);
        }
        std::fill(grad.begin(), grad.end(), 0.0);
        for (std::size_t s = 0; s < batch; ++s) {
            const std::size_t i = batch < n ? order[s] : s;
            const double d = loss_derivative(problem.loss(), z[i], problem.response(i));
            const auto row = data.row(i);
            for (std::size_t p = 0; p < row.indices.size(); ++p) grad[row.indices[p]] += d * row.values[p];
        }
        const double scale = 1.0 / static_cast<double>(batch);
        for (std::size_t j = 0; j < m; ++j) in[j] = x[j] - config.eta * grad[j] * scale;
        for (std::size_t b = 0; b < blocks.count(); ++b) {
            const auto first = static_cast<std::ptrdiff_t>(blocks.begin(b));
            const auto len = blocks.size(b);
            problem.regularizer().prox(std::span<const double>(in).subspan(first, len),
                                       std::span<double>(next).subspan(first, len), config.eta);
        }
        double step_sq = 0.0;
        for (std::size_t j = 0; j < m; ++j) step_sq += (next[j] - x[j]) * (next[j] - x[j]);
        x.swap(next);

        IterationRecord rec;
        rec.k = k;
        rec.F = full_objective(problem, x);
        rec.F_x = rec.F;
        rec.F_v = rec.F;
        rec.step_sq = step_sq;
        rec.delta_sq = step_sq;
        if (!std::isfinite(rec.F) || rec.F > limit)
            throw DivergenceError(k, "objective diverged at iteration " + std::to_string(k));
        if (config.record_timestamps)
            rec.wallclock_ns =
                std::chrono::duration_cast<std::chrono::nanoseconds>(clock::now() - start).count();
        result.trace.records.push_back(rec);
    }

    result.x = std::move(x);
    result.objective = full_objective(problem, result.x);
    result.wall_ns =
        std::chrono::duration_cast<std::chrono::nanoseconds>(clock::now() - start).count();
    return result;
}

} // namespace aapcd
