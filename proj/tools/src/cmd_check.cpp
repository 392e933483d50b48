#include "cli.hpp"
#include "commands.hpp"

#include "aapcd/trace.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <charconv>
#include <fstream>
#include <stdexcept>

namespace aapcd::cli {

using nlohmann::json;

namespace {

std::vector<double> read_series(const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::vector<double> r;
    std::string line;
    while (std::getline(in, line)) {
        const auto first = line.find_first_not_of(" \t\r");
        if (first == std::string::npos || line[first] == '#') continue;
        const auto last = line.find_last_not_of(" \t\r");
        double v = 0.0;
        const char* b = line.data() + first;
        const char* e = line.data() + last + 1;
        const auto [p, ec] = std::from_chars(b, e, v);
        if (ec != std::errc() || p != e)
            throw std::invalid_argument("bad number in " + path + ": '" + line + "'");
        r.push_back(v);
    }
    return r;
}

json fit_json(const RateFitReport& f)
{
    return json{{"kind", "rate_fit"},     {"theta", f.theta},
                {"linear", f.linear},     {"slope", f.slope},
                {"intercept", f.intercept}, {"contraction", f.contraction},
                {"exponent", f.exponent}, {"r_squared", f.r_squared},
                {"points", f.points}};
}

} // namespace

int cmd_check(CheckArgs& a, std::ostream& out)
{
    const std::string path =
        !a.report.empty() ? a.report : (a.series.empty() ? a.trace : a.series) + ".check.jsonl";
    std::ofstream report(path);
    if (!report) throw std::runtime_error("cannot write " + path);
    const double theta = a.theta.value_or(0.5);

    if (!a.series.empty()) {
        const auto r = read_series(a.series);
        const auto fit = fit_rate(r, theta, a.fit_first.value_or(0), a.fit_last.value_or(r.size()));
        report << fit_json(fit).dump() << '\n';
        if (fit.linear) out << "contraction: " << fit.contraction << '\n';
        else out << "exponent: " << fit.exponent << '\n';
        out << "r_squared: " << fit.r_squared << '\n';
        return exit_ok;
    }

    const auto manifest = read_manifest(a.manifest.empty() ? a.trace + ".manifest.json" : a.manifest);
    const auto trace = read_trace_csv(a.trace);
    std::size_t observed = 0;
    for (const auto& r : trace.records) observed = std::max(observed, r.delay);
    const auto spec = lyapunov_for(manifest, observed);
    const bool pointwise = spec.regime != Regime::stochastic_unbounded;

    DescentOptions opts;
    opts.eta = manifest.solver.eta;
    opts.relative_tolerance = a.tolerance;
    opts.quantitative = pointwise;
    const auto d = descent_check(trace, spec, opts);
    const std::size_t violations = pointwise ? d.increases.size() + d.quantitative.size() : 0;

    report << json{{"kind", "descent"},
                   {"regime", manifest.solver.regime},
                   {"pointwise", pointwise},
                   {"checked", d.checked},
                   {"tolerance", d.tolerance},
                   {"increases", d.increases.size()},
                   {"quantitative", d.quantitative.size()},
                   {"nonpositive_coefficient", d.nonpositive.size()},
                   {"worst_excess", d.worst_excess}}
                  .dump()
           << '\n';
    if (pointwise) {
        std::size_t listed = 0;
        for (auto k : d.increases) {
            if (listed++ >= a.list_limit) break;
            report << json{{"kind", "violation"}, {"type", "increase"}, {"k", k}}.dump() << '\n';
        }
        for (auto k : d.quantitative) {
            if (listed++ >= a.list_limit) break;
            report << json{{"kind", "violation"}, {"type", "quantitative"}, {"k", k}}.dump()
                   << '\n';
        }
    }

    if (a.theta) {
        const auto r = residual_series(trace, a.f_star);
        const std::size_t first = a.fit_first.value_or(r.size() / 5);
        report << fit_json(fit_rate(r, theta, first, a.fit_last.value_or(r.size()))).dump() << '\n';
    }
    report << json{{"kind", "summary"}, {"violations", violations}}.dump() << '\n';
    out << violations << " violations\n";
    return violations == 0 ? exit_ok : exit_violations;
}

} // namespace aapcd::cli
