#include "commands.hpp"

#include "aapcd/trace.hpp"

#include <algorithm>
#include <iomanip>
#include <stdexcept>

namespace aapcd::cli {

namespace {

std::size_t max_delay(const IterationTrace& t)
{
    std::size_t d = 0;
    for (const auto& r : t.records) d = std::max(d, r.delay);
    return d;
}

} // namespace

int cmd_solve(SolveArgs& a, std::ostream& out)
{
    RunManifest m;
    auto problem = [&] {
        if (a.replay.empty()) {
            auto p = prepare(a.flags);
            m = a.flags.manifest;
            return p;
        }
        m = read_manifest(a.replay);
        auto p = make_problem(m.problem);
        const auto hash = hex(p.data().content_hash());
        if (hash != m.dataset_hash)
            throw std::invalid_argument("dataset hash " + hash + " does not match manifest " +
                                        m.dataset_hash);
        return p;
    }();
    m.command = "solve";
    m.version = kVersion;

    auto schedule = make_schedule(m.schedule);
    const auto config = make_config(m.solver);
    m.started = utc_now();
    auto result = run(problem, config, schedule, parse_selection(m.solver.selection));
    m.finished = utc_now();
    m.initial_objective = result.trace.initial_objective;
    annotate_lyapunov(result.trace, lyapunov_for(m, max_delay(result.trace)));

    write_trace_csv(a.trace, result.trace);
    write_manifest(a.manifest_out.empty() ? a.trace + ".manifest.json" : a.manifest_out, m);

    out << std::setprecision(17);
    out << "F0: " << result.trace.initial_objective << '\n';
    out << "F: " << result.objective << '\n';
    out << "max_stationarity: " << result.stationarity.max_norm << '\n';
    out << "iterations: " << result.trace.records.size() << '\n';
    out << "eta: " << m.solver.eta << '\n';
    out << "wall_ms: " << static_cast<double>(result.wall_ns) * 1e-6 << '\n';
    return 0;
}

} // namespace aapcd::cli
