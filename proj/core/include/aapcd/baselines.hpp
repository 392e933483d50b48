#pragma once

#include "aapcd/solver.hpp"

#include <cstddef>
#include <cstdint>
#include <span>

namespace aapcd {

/// Momentum-free asynchronous proximal coordinate descent: AAPCD with
/// beta = beta_neg = 0, so v = x and the x branch is always taken.
SolveResult run_ascd(const ProblemSpec& problem, const SolverConfig& config,
                     DelaySchedule& schedule, std::span<const double> x0 = {});

struct DspgConfig {
    double eta = 0.0;
    std::size_t batch = 0; ///< rows per step; 0 or n means full gradient
    std::size_t iterations = 0;
    std::uint64_t seed = 0;
    double divergence_factor = 1e6;
    bool record_timestamps = false;

    void validate(std::size_t rows) const;
};

/// Synchronous mini-batch proximal gradient: x <- prox_{eta g}(x - eta g_B(x)),
/// g_B the gradient of f restricted to a seeded batch of rows sampled
/// without replacement. Trace records use j_k = 0 and d_k = 0.
SolveResult run_dspg(const ProblemSpec& problem, const DspgConfig& config,
                     std::span<const double> x0 = {});

} // namespace aapcd
