#pragma once

#include "aapcd/solver.hpp"

#include <span>
#include <vector>

namespace aapcd::detail {

std::size_t history_capacity(const SolverConfig& config, const DelaySchedule& schedule,
                             std::size_t blocks);
std::vector<double> initial_point(const ProblemSpec& problem, std::span<const double> x0);

/// Multi-worker engine on a shared iterate; delays are whatever the
/// interleaving produces.
SolveResult run_measured(const ProblemSpec& problem, const SolverConfig& config,
                         Selection selection, std::span<const double> x0);

} // namespace aapcd::detail
