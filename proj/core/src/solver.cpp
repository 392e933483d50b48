#include "aapcd/solver.hpp"

#include "aapcd/diagnostics.hpp"
#include "engine.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <stdexcept>
#include <string>

namespace aapcd {

std::string_view to_string(Regime regime)
{
    switch (regime) {
    case Regime::bounded: return "bounded";
    case Regime::stochastic_unbounded: return "stochastic_unbounded";
    case Regime::deterministic_unbounded: return "deterministic_unbounded";
    }
    return "?";
}

std::string_view to_string(Selection selection)
{
    return selection == Selection::cyclic ? "cyclic" : "stochastic";
}

std::string_view to_string(Branch branch) { return branch == Branch::v ? "v" : "x"; }

Regime parse_regime(std::string_view name)
{
    if (name == "bounded") return Regime::bounded;
    if (name == "stochastic_unbounded") return Regime::stochastic_unbounded;
    if (name == "deterministic_unbounded") return Regime::deterministic_unbounded;
    throw std::invalid_argument("unknown regime: " + std::string(name));
}

Branch parse_branch(std::string_view name)
{
    if (name == "x") return Branch::x;
    if (name == "v") return Branch::v;
    throw std::invalid_argument("unknown branch: " + std::string(name));
}

void SolverConfig::validate() const
{
    if (!(eta > 0.0) || !std::isfinite(eta)) throw std::invalid_argument("eta must be positive");
    if (!(beta >= 0.0) || !std::isfinite(beta))
        throw std::invalid_argument("beta must be nonnegative");
    if (!(beta_neg > -1.0 && beta_neg <= 0.0))
        throw std::invalid_argument("beta_neg must lie in (-1, 0]");
    if (workers == 0) throw std::invalid_argument("workers must be at least 1");
    if (!(divergence_factor > 0.0)) throw std::invalid_argument("divergence factor must be positive");
}

// --- iterate state -------------------------------------------------------------

IterateState::IterateState(const ProblemSpec& problem, std::span<const double> y0)
    : y(y0.begin(), y0.end())
{
    if (y.size() != problem.dimension())
        throw std::invalid_argument("initial point has dimension " + std::to_string(y.size()) +
                                    ", expected " + std::to_string(problem.dimension()));
    refresh(problem);
}

void IterateState::refresh(const ProblemSpec& problem)
{
    z.assign(problem.data().rows(), 0.0);
    problem.data().multiply(y, z);
    f = problem.smooth_from_residual(z);
    g = problem.regularizer_value(y);
    pending = 0;
}

void StepWorkspace::reserve(const ProblemSpec& problem)
{
    const auto n = problem.data().rows();
    if (dz_x.size() != n) {
        dz_x.assign(n, 0.0);
        dz_v.assign(n, 0.0);
        mark.assign(n, 0);
        touched.clear();
        touched.reserve(n);
    }
}

// --- one iteration ---------------------------------------------------------------

IterationRecord step_with_gradient(IterateState& state, const ProblemSpec& problem,
                                   const SolverConfig& config, std::size_t block,
                                   std::span<const double> delayed_gradient, std::size_t delay,
                                   StepWorkspace& ws, double reference_objective,
                                   BlockMemory* memory)
{
    const auto& blocks = problem.blocks();
    const auto& data = problem.data();
    const auto& reg = problem.regularizer();
    if (block >= blocks.count()) throw std::out_of_range("step: block out of range");
    const std::size_t first = blocks.begin(block);
    const std::size_t nb = blocks.size(block);
    if (delayed_gradient.size() != nb) throw std::invalid_argument("step: gradient size mismatch");
    ws.reserve(problem);
    ws.before.assign(state.y.begin() + first, state.y.begin() + first + nb);
    ws.xb.resize(nb);
    ws.vb.resize(nb);

    const double eta = config.eta;
    for (std::size_t c = 0; c < nb; ++c) ws.vb[c] = ws.before[c] - eta * delayed_gradient[c];
    reg.prox(ws.vb, ws.xb, eta);

    const double beta_k = delay <= config.t1 ? config.beta : config.beta_neg;
    double delta_sq = 0.0;
    for (std::size_t c = 0; c < nb; ++c) {
        const double dx = ws.xb[c] - ws.before[c];
        ws.vb[c] = ws.xb[c] + beta_k * dx;
        delta_sq += dx * dx;
        if (!std::isfinite(ws.xb[c]) || !std::isfinite(ws.vb[c]))
            throw DivergenceError(state.k, "non-finite coordinate at iteration " +
                                               std::to_string(state.k));
    }

    // Residual changes of both candidates on the rows this block touches.
    for (std::size_t c = 0; c < nb; ++c) {
        const double dx = ws.xb[c] - ws.before[c];
        const double dv = ws.vb[c] - ws.before[c];
        if (dx == 0.0 && dv == 0.0) continue;
        const auto col = data.column(first + c);
        for (std::size_t p = 0; p < col.indices.size(); ++p) {
            const auto i = col.indices[p];
            if (!ws.mark[i]) {
                ws.mark[i] = 1;
                ws.touched.push_back(i);
                ws.dz_x[i] = 0.0;
                ws.dz_v[i] = 0.0;
            }
            ws.dz_x[i] += dx * col.values[p];
            ws.dz_v[i] += dv * col.values[p];
        }
    }
    double df_x = 0.0, df_v = 0.0;
    for (auto i : ws.touched) {
        const double b = problem.response(i);
        const double base = loss_value(problem.loss(), state.z[i], b);
        df_x += loss_value(problem.loss(), state.z[i] + ws.dz_x[i], b) - base;
        df_v += loss_value(problem.loss(), state.z[i] + ws.dz_v[i], b) - base;
    }
    const double inv_n = 1.0 / static_cast<double>(data.rows());
    const double g_old = reg.block_value(ws.before);
    const double f_x = state.f + df_x * inv_n;
    const double f_v = state.f + df_v * inv_n;
    const double g_x = state.g - g_old + reg.block_value(ws.xb);
    const double g_v = state.g - g_old + reg.block_value(ws.vb);
    const double F_x = f_x + g_x;
    const double F_v = f_v + g_v;

    const Branch branch = F_v < F_x ? Branch::v : Branch::x;
    const auto& chosen = branch == Branch::v ? ws.vb : ws.xb;
    const auto& dz = branch == Branch::v ? ws.dz_v : ws.dz_x;
    double step_sq = 0.0;
    for (std::size_t c = 0; c < nb; ++c) {
        const double d = chosen[c] - ws.before[c];
        step_sq += d * d;
        state.y[first + c] = chosen[c];
    }
    for (auto i : ws.touched) {
        state.z[i] += dz[i];
        ws.mark[i] = 0;
    }
    ws.touched.clear();
    state.f = branch == Branch::v ? f_v : f_x;
    state.g = branch == Branch::v ? g_v : g_x;

    if (memory) {
        memory->updated = true;
        memory->iteration = state.k;
        memory->delayed_gradient.assign(delayed_gradient.begin(), delayed_gradient.end());
        memory->prox_step.resize(nb);
        for (std::size_t c = 0; c < nb; ++c) memory->prox_step[c] = ws.xb[c] - ws.before[c];
    }

    IterationRecord rec;
    rec.k = state.k;
    rec.block = block;
    rec.delay = delay;
    rec.beta = beta_k;
    rec.branch = branch;
    rec.F = branch == Branch::v ? F_v : F_x;
    rec.step_sq = step_sq;
    rec.F_x = F_x;
    rec.F_v = F_v;
    rec.delta_sq = delta_sq;

    const double limit = config.divergence_factor * std::max(std::abs(reference_objective), 1.0);
    if (!std::isfinite(rec.F) || rec.F > limit)
        throw DivergenceError(state.k, "objective diverged at iteration " + std::to_string(state.k) +
                                           " (F = " + std::to_string(rec.F) + ")");

    ++state.k;
    if (++state.pending >= ResidualCache::kRefreshInterval) state.refresh(problem);
    return rec;
}

IterationRecord step(IterateState& state, const ProblemSpec& problem, const SolverConfig& config,
                     std::size_t block, std::span<const double> y_hat, std::size_t delay,
                     BlockMemory* memory)
{
    StepWorkspace ws;
    const auto grad = block_gradient(problem, y_hat, block);
    return step_with_gradient(state, problem, config, block, grad, delay, ws, state.objective(),
                              memory);
}

// --- simulated engine --------------------------------------------------------------

namespace detail {

std::size_t history_capacity(const SolverConfig& config, const DelaySchedule& schedule,
                             std::size_t blocks)
{
    if (config.history_capacity > 0) return config.history_capacity;
    constexpr std::size_t hard_cap = std::size_t{1} << 22;
    const std::size_t bound = std::min(schedule.bound().value_or(0), hard_cap);
    const std::size_t wanted = 4 * (bound + blocks);
    return std::max<std::size_t>(1, std::min({wanted, config.iterations + 1, hard_cap}));
}

std::vector<double> initial_point(const ProblemSpec& problem, std::span<const double> x0)
{
    if (x0.empty()) return std::vector<double>(problem.dimension(), 0.0);
    if (x0.size() != problem.dimension())
        throw std::invalid_argument("initial point has the wrong dimension");
    return {x0.begin(), x0.end()};
}

} // namespace detail

namespace {

SolveResult simulate(const ProblemSpec& problem, const SolverConfig& config,
                     DelaySchedule& schedule, Selection selection, std::span<const double> x0)
{
    using clock = std::chrono::steady_clock;
    const auto start = clock::now();

    const auto& blocks = problem.blocks();
    const auto& data = problem.data();
    const std::size_t K = blocks.count();
    IterateState state(problem, detail::initial_point(problem, x0));
    const double F0 = state.objective();

    SolveResult result;
    result.trace.initial_objective = F0;
    result.trace.records.reserve(config.iterations);
    result.memory.resize(K);

    HistoryRing history(detail::history_capacity(config, schedule, K));
    Rng select_rng(config.seed);
    Rng read_rng(config.read.seed);
    StepWorkspace ws;
    ws.reserve(problem);

    std::vector<double> grad;
    // Rows of z overwritten with the rolled-back residual, and their saved values.
    std::vector<double> rollback(data.rows(), 0.0);
    std::vector<unsigned char> rolled(data.rows(), 0);
    std::vector<std::uint32_t> rows;
    std::vector<double> saved;

    for (std::size_t k = 0; k < config.iterations; ++k) {
        const std::size_t block = selection == Selection::cyclic ? k % K : select_rng.index(K);
        const std::size_t delay = schedule.next_delay(k);
        if (!history.covers(k, delay))
            throw std::out_of_range("history evicted: delay " + std::to_string(delay) +
                                    " at iteration " + std::to_string(k) + " exceeds capacity " +
                                    std::to_string(history.capacity()));
        grad.resize(blocks.size(block));
        if (delay == 0) {
            block_gradient_from_residual(problem, state.z, block, grad);
        } else {
            // z_hat = z - sum_{h in I(k)} A (y^{h+1} - y^h), on the rows those updates touched.
            const auto read = read_set(k, delay, config.read, &read_rng);
            for (auto h : read) {
                const auto& rec = history.at(h);
                for (std::size_t c = 0; c < rec.before.size(); ++c) {
                    const double d = rec.after[c] - rec.before[c];
                    if (d == 0.0) continue;
                    const auto col = data.column(rec.first + c);
                    for (std::size_t p = 0; p < col.indices.size(); ++p) {
                        const auto i = col.indices[p];
                        if (!rolled[i]) {
                            rolled[i] = 1;
                            rows.push_back(i);
                            rollback[i] = 0.0;
                        }
                        rollback[i] += d * col.values[p];
                    }
                }
            }
            saved.resize(rows.size());
            for (std::size_t r = 0; r < rows.size(); ++r) {
                saved[r] = state.z[rows[r]];
                state.z[rows[r]] -= rollback[rows[r]];
            }
            block_gradient_from_residual(problem, state.z, block, grad);
            for (std::size_t r = 0; r < rows.size(); ++r) {
                state.z[rows[r]] = saved[r];
                rolled[rows[r]] = 0;
            }
            rows.clear();
        }

        auto rec = step_with_gradient(state, problem, config, block, grad, delay, ws, F0,
                                      &result.memory[block]);
        const std::size_t first = blocks.begin(block);
        history.push(first, ws.before,
                     std::span<const double>(state.y).subspan(first, blocks.size(block)),
                     rec.step_sq);
        if (config.record_timestamps)
            rec.wallclock_ns =
                std::chrono::duration_cast<std::chrono::nanoseconds>(clock::now() - start).count();
        result.trace.records.push_back(rec);
    }

    result.x = std::move(state.y);
    result.objective = full_objective(problem, result.x);
    result.stationarity = stationarity_residual(problem, result.x, result.memory, config.eta);
    result.wall_ns =
        std::chrono::duration_cast<std::chrono::nanoseconds>(clock::now() - start).count();
    result.workers = 1;
    return result;
}

} // namespace

SolveResult run(const ProblemSpec& problem, const SolverConfig& config, DelaySchedule& schedule,
                Selection selection, std::span<const double> x0)
{
    config.validate();
    if (problem.blocks().count() == 0) throw std::invalid_argument("problem has no coordinates");
    if (schedule.mode() == DelayMode::measured)
        return detail::run_measured(problem, config, selection, x0);
    return simulate(problem, config, schedule, selection, x0);
}

SolveResult run_stochastic(const ProblemSpec& problem, const SolverConfig& config,
                           DelaySchedule& schedule, std::span<const double> x0)
{
    return run(problem, config, schedule, Selection::stochastic, x0);
}

SolveResult run_deterministic(const ProblemSpec& problem, const SolverConfig& config,
                              DelaySchedule& schedule, std::span<const double> x0)
{
    return run(problem, config, schedule, Selection::cyclic, x0);
}

} // namespace aapcd
