#pragma once

#include "aapcd/delays.hpp"
#include "aapcd/model.hpp"

#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace aapcd {

/// Which delay analysis the configuration is meant to satisfy.
enum class Regime { bounded, stochastic_unbounded, deterministic_unbounded };
/// Block selection: uniform random (stochastic) or round-robin (deterministic).
enum class Selection { stochastic, cyclic };
/// Candidate accepted as y^{k+1}.
enum class Branch { x, v };

std::string_view to_string(Regime regime);
std::string_view to_string(Selection selection);
std::string_view to_string(Branch branch);
Regime parse_regime(std::string_view name);
Branch parse_branch(std::string_view name);

struct SolverConfig {
    double eta = 0.0;      ///< stepsize
    double beta = 0.0;     ///< momentum when d_k <= T1
    double beta_neg = 0.0; ///< momentum when d_k > T1
    std::size_t t1 = 0;
    std::size_t iterations = 0;
    std::uint64_t seed = 0;
    Regime regime = Regime::bounded;
    ReadPolicy read = ReadPolicy::consistent();
    /// Threads for the measured-delay engine; simulated engines ignore it.
    std::size_t workers = 1;
    /// Retained updates for delayed reads; 0 picks 4 (bound + blocks), capped
    /// by the iteration budget.
    std::size_t history_capacity = 0;
    /// Fill wallclock_ns in simulated runs (breaks bit-identical traces).
    bool record_timestamps = false;
    /// Abort once F exceeds this multiple of max(|F(y^0)|, 1).
    double divergence_factor = 1e6;

    /// Throws std::invalid_argument: eta <= 0, beta < 0, beta_neg outside
    /// (-1, 0], workers == 0.
    void validate() const;
};

/// One iteration. F, G and xi refer to y^{k+1}; step_sq = ||y^{k+1} - y^k||^2
/// and delta_sq = ||x^{k+1} - y^k||^2.
struct IterationRecord {
    std::size_t k = 0;
    std::size_t block = 0;
    std::size_t delay = 0;
    double beta = 0.0;
    Branch branch = Branch::x;
    double F = 0.0;
    double xi = 0.0;
    double G = 0.0;
    double step_sq = 0.0;
    std::int64_t wallclock_ns = 0;
    // Not part of the CSV schema.
    double F_x = std::numeric_limits<double>::quiet_NaN();
    double F_v = std::numeric_limits<double>::quiet_NaN();
    double delta_sq = std::numeric_limits<double>::quiet_NaN();

    bool operator==(const IterationRecord&) const = default;
};

struct IterationTrace {
    double initial_objective = 0.0;
    std::vector<IterationRecord> records;
};

/// Per-block data from the last update, for the stationarity residual.
struct BlockMemory {
    bool updated = false;
    std::size_t iteration = 0;
    std::vector<double> delayed_gradient; ///< grad_B f(y_hat)
    std::vector<double> prox_step;        ///< x_B^{k+1} - y_B^k
};

struct StationarityReport {
    /// ||q_B|| per block; NaN for blocks never updated.
    std::vector<double> per_block;
    double max_norm = 0.0; ///< max over updated blocks
    double norm = 0.0;     ///< Euclidean norm of q over updated blocks
    std::size_t never_updated = 0;
};

struct SolveResult {
    std::vector<double> x;
    double objective = 0.0;
    IterationTrace trace;
    std::vector<BlockMemory> memory;
    StationarityReport stationarity;
    std::int64_t wall_ns = 0;
    std::size_t workers = 1;
};

class DivergenceError : public std::runtime_error {
public:
    DivergenceError(std::size_t iteration, const std::string& what)
        : std::runtime_error(what), iteration_(iteration)
    {
    }
    std::size_t iteration() const { return iteration_; }

private:
    std::size_t iteration_;
};

/// y^k with its residual z = A y^k and the split objective f + g, kept in
/// step incrementally and rebuilt every ResidualCache::kRefreshInterval updates.
struct IterateState {
    IterateState(const ProblemSpec& problem, std::span<const double> y0);

    std::vector<double> y;
    std::vector<double> z;
    double f = 0.0;
    double g = 0.0;
    std::size_t k = 0;
    std::size_t pending = 0; ///< block updates since the last rebuild

    double objective() const { return f + g; }
    /// Recomputes z, f and g from y.
    void refresh(const ProblemSpec& problem);
};

/// Scratch buffers for step(); reuse one per engine to avoid allocation.
struct StepWorkspace {
    std::vector<double> grad, xb, vb, before;
    std::vector<double> dz_x, dz_v;      ///< residual change per row, size n
    std::vector<std::uint32_t> touched;  ///< rows with a pending change
    std::vector<unsigned char> mark;     ///< row is in `touched`

    void reserve(const ProblemSpec& problem);
};

/// One AAPCD iteration on block `block` given grad_B f(y_hat):
///   x_B = prox_{eta g}(y_B - eta grad)
///   v_B = x_B + beta_k (x_B - y_B), beta_k = beta if delay <= T1 else beta_neg
///   y^{k+1} = argmin of F over {x, v}, ties to x.
/// F(x) and F(v) are evaluated from the rows the block touches. Throws
/// DivergenceError on a non-finite value or a blown-up objective; the
/// threshold is config.divergence_factor * max(|reference|, 1).
IterationRecord step_with_gradient(IterateState& state, const ProblemSpec& problem,
                                   const SolverConfig& config, std::size_t block,
                                   std::span<const double> delayed_gradient, std::size_t delay,
                                   StepWorkspace& ws, double reference_objective,
                                   BlockMemory* memory = nullptr);

/// As above, with the gradient evaluated at the delayed iterate y_hat.
IterationRecord step(IterateState& state, const ProblemSpec& problem, const SolverConfig& config,
                     std::size_t block, std::span<const double> y_hat, std::size_t delay,
                     BlockMemory* memory = nullptr);

/// Uniform random blocks. Simulated (single-threaded) for every schedule mode
/// except measured, which runs config.workers threads on a shared iterate.
/// `x0` defaults to zero.
SolveResult run_stochastic(const ProblemSpec& problem, const SolverConfig& config,
                           DelaySchedule& schedule, std::span<const double> x0 = {});

/// Round-robin blocks 0, 1, .., K-1, 0, ..; otherwise as run_stochastic.
SolveResult run_deterministic(const ProblemSpec& problem, const SolverConfig& config,
                              DelaySchedule& schedule, std::span<const double> x0 = {});

SolveResult run(const ProblemSpec& problem, const SolverConfig& config, DelaySchedule& schedule,
                Selection selection, std::span<const double> x0 = {});

} // namespace aapcd
