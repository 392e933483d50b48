#include "engine.hpp"

#include "aapcd/diagnostics.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <exception>
#include <memory>
#include <mutex>
#include <thread>

namespace aapcd::detail {

namespace {

struct WorkerOutput {
    std::vector<IterationRecord> records;
    std::vector<BlockMemory> memory;
};

} // namespace

SolveResult run_measured(const ProblemSpec& problem, const SolverConfig& config,
                         Selection selection, std::span<const double> x0)
{
    using clock = std::chrono::steady_clock;
    const auto start = clock::now();

    const auto& blocks = problem.blocks();
    const auto& data = problem.data();
    const std::size_t m = problem.dimension();
    const std::size_t K = blocks.count();
    const std::size_t R = config.iterations;
    const auto y0 = initial_point(problem, x0);
    const double F0 = full_objective(problem, y0);

    auto shared = std::make_unique<std::atomic<double>[]>(m);
    for (std::size_t j = 0; j < m; ++j) shared[j].store(y0[j], std::memory_order_relaxed);
    std::atomic<std::size_t> counter{0};
    std::atomic<std::size_t> cyclic_cursor{0};
    std::atomic<bool> stop{false};
    std::mutex error_mutex;
    std::exception_ptr error;

    std::vector<WorkerOutput> outputs(config.workers);

    auto worker = [&](std::size_t w) {
        try {
            auto& out = outputs[w];
            out.memory.resize(K);
            out.records.reserve(R / config.workers + 1);
            IterateState local(problem, y0);
            StepWorkspace ws;
            ws.reserve(problem);
            std::vector<double> grad;
            Rng rng(config.seed + 0x9e3779b97f4a7c15ULL * (w + 1));

            while (!stop.load(std::memory_order_relaxed)) {
                const std::size_t i = counter.load(std::memory_order_acquire);
                if (i >= R) break;

                // Bring the private view up to the shared iterate.
                bool changed = false;
                for (std::size_t j = 0; j < m; ++j) {
                    const double v = shared[j].load(std::memory_order_relaxed);
                    if (v == local.y[j]) continue;
                    const double delta = v - local.y[j];
                    const auto col = data.column(j);
                    for (std::size_t p = 0; p < col.indices.size(); ++p)
                        local.z[col.indices[p]] += delta * col.values[p];
                    local.y[j] = v;
                    ++local.pending;
                    changed = true;
                }
                if (local.pending >= ResidualCache::kRefreshInterval) {
                    local.refresh(problem);
                } else if (changed) {
                    local.f = problem.smooth_from_residual(local.z);
                    local.g = problem.regularizer_value(local.y);
                }

                const std::size_t block =
                    selection == Selection::cyclic
                        ? cyclic_cursor.fetch_add(1, std::memory_order_relaxed) % K
                        : rng.index(K);
                grad.resize(blocks.size(block));
                block_gradient_from_residual(problem, local.z, block, grad);

                const std::size_t k = counter.fetch_add(1, std::memory_order_acq_rel);
                if (k >= R) break;
                local.k = k;
                auto rec = step_with_gradient(local, problem, config, block, grad, k - i, ws, F0,
                                              &out.memory[block]);
                const std::size_t first = blocks.begin(block);
                for (std::size_t c = 0; c < blocks.size(block); ++c)
                    shared[first + c].store(local.y[first + c], std::memory_order_release);
                rec.wallclock_ns =
                    std::chrono::duration_cast<std::chrono::nanoseconds>(clock::now() - start)
                        .count();
                out.records.push_back(rec);
            }
        } catch (...) {
            std::lock_guard lock(error_mutex);
            if (!error) error = std::current_exception();
            stop.store(true, std::memory_order_relaxed);
        }
    };

    {
        std::vector<std::jthread> threads;
        threads.reserve(config.workers);
        for (std::size_t w = 0; w < config.workers; ++w) threads.emplace_back(worker, w);
    }
    if (error) std::rethrow_exception(error);

    SolveResult result;
    result.workers = config.workers;
    result.trace.initial_objective = F0;
    for (auto& out : outputs)
        result.trace.records.insert(result.trace.records.end(), out.records.begin(),
                                    out.records.end());
    std::sort(result.trace.records.begin(), result.trace.records.end(),
              [](const IterationRecord& a, const IterationRecord& b) { return a.k < b.k; });

    result.memory.resize(K);
    for (auto& out : outputs)
        for (std::size_t b = 0; b < K; ++b) {
            auto& mine = out.memory[b];
            auto& best = result.memory[b];
            if (mine.updated && (!best.updated || mine.iteration > best.iteration))
                best = std::move(mine);
        }

    result.x.resize(m);
    for (std::size_t j = 0; j < m; ++j) result.x[j] = shared[j].load(std::memory_order_relaxed);
    result.objective = full_objective(problem, result.x);
    result.stationarity = stationarity_residual(problem, result.x, result.memory, config.eta);
    result.wall_ns =
        std::chrono::duration_cast<std::chrono::nanoseconds>(clock::now() - start).count();
    return result;
}

} // namespace aapcd::detail
