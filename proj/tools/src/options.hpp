#pragma once

#include "run_spec.hpp"

#include "aapcd/diagnostics.hpp"

#include <CLI11.hpp>

#include <optional>
#include <string>

namespace aapcd::cli {

/// Flags shared by solve and bench, before eta, T1, regime and L are resolved.
struct RunFlags {
    RunManifest manifest;
    std::string eta = "auto";
    std::optional<std::size_t> t1;
    std::optional<double> t1_frac;
    std::optional<std::string> regime;
    double safety = 0.95;
    double step_constant = 0.95; ///< c of the deterministic stepsize
    std::string schedule_file;
};

void add_problem_options(CLI::App& app, ProblemOptions& p);
void add_schedule_options(CLI::App& app, ScheduleOptions& s, std::string& schedule_file);
void add_run_options(CLI::App& app, RunFlags& flags);

/// Regime implied by a schedule mode when none is given.
std::string default_regime(const std::string& schedule_mode);

Selection parse_selection(const std::string& name);

/// Fills in T1, regime and eta of flags.manifest. L must already be resolved.
void resolve(RunFlags& flags);

/// Loads the schedule file, builds the problem (resolving L), records the
/// dataset hash and resolves the remaining flags.
ProblemSpec prepare(RunFlags& flags);

/// Lyapunov function matching a manifest's regime and schedule.
/// `observed_max_delay` widens the window for measured and scripted runs.
LyapunovSpec lyapunov_for(const RunManifest& m, std::size_t observed_max_delay);

} // namespace aapcd::cli
