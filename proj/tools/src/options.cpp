#include "options.hpp"

#include "aapcd/parameters.hpp"

#include <algorithm>
#include <charconv>
#include <filesystem>
#include <stdexcept>

namespace aapcd::cli {

void add_problem_options(CLI::App& app, ProblemOptions& p)
{
    app.add_option("--data", p.data_path, "libsvm dataset; synthetic data when omitted")
        ->check(CLI::ExistingFile);
    app.add_option("--synthetic", p.synthetic, "synthetic generator")
        ->check(CLI::IsMember({"classification", "regression"}));
    app.add_option("--rows", p.rows, "synthetic samples");
    app.add_option("--cols", p.cols, "synthetic features");
    app.add_option("--data-seed", p.data_seed);
    app.add_option("--label-noise", p.label_noise, "classification label noise");
    app.add_option("--support", p.support, "regression: planted nonzeros");
    app.add_option("--noise", p.noise, "regression: target noise");
    app.add_option("--loss", p.loss)->check(CLI::IsMember({"logistic", "sigmoid", "quadratic"}));
    app.add_option("--reg", p.reg)
        ->check(CLI::IsMember({"none", "l1", "capped_l1", "block_norm"}));
    app.add_option("--lambda", p.lambda)->check(CLI::NonNegativeNumber);
    app.add_option("--theta-cap", p.theta_cap, "capped-L1 threshold");
    app.add_option("--block-size", p.block_size)->check(CLI::PositiveNumber);
    app.add_option("--lipschitz", p.lipschitz, "override the estimated L");
}

void add_schedule_options(CLI::App& app, ScheduleOptions& s, std::string& schedule_file)
{
    app.add_option("--schedule", s.mode, "delay schedule")
        ->check(CLI::IsMember({"bounded", "power_law", "epsilon", "scripted", "measured"}));
    app.add_option("--tau", s.tau, "delay bound (bounded), D (epsilon)");
    app.add_option("--exponent", s.exponent, "power-law exponent");
    app.add_option("--truncation", s.truncation, "power-law support end");
    app.add_option("--rho", s.rho, "geometric eps ratio");
    app.add_option("--eps-truncation", s.eps_truncation, "eps_i = 0 beyond this index");
    app.add_option("--schedule-file", schedule_file, "delays for the scripted schedule")
        ->check(CLI::ExistingFile);
    app.add_option("--delay-seed", s.seed);
}

void add_run_options(CLI::App& app, RunFlags& f)
{
    auto& s = f.manifest.solver;
    add_problem_options(app, f.manifest.problem);
    add_schedule_options(app, f.manifest.schedule, f.schedule_file);
    app.add_option("--eta", f.eta, "stepsize or 'auto'");
    app.add_option("--safety", f.safety, "auto stepsize safety factor")
        ->check(CLI::Range(0.0, 1.0));
    app.add_option("--step-constant", f.step_constant, "c of the deterministic stepsize")
        ->check(CLI::Range(0.0, 1.0));
    app.add_option("--beta", s.beta);
    app.add_option("--beta-neg", s.beta_neg);
    auto* t1 = app.add_option("--t1", f.t1, "momentum threshold");
    app.add_option("--t1-frac", f.t1_frac, "T1 = round(frac * tau)")->excludes(t1);
    app.add_option("--regime", f.regime)
        ->check(CLI::IsMember({"bounded", "stochastic_unbounded", "deterministic_unbounded"}));
    app.add_option("--selection", s.selection)->check(CLI::IsMember({"stochastic", "cyclic"}));
    app.add_option("--read", s.read)->check(CLI::IsMember({"consistent", "inconsistent"}));
    app.add_option("--read-seed", s.read_seed);
    app.add_option("--iters", s.iterations);
    app.add_option("--seed", s.seed);
    app.add_option("--workers", s.workers)->check(CLI::PositiveNumber);
    app.add_flag("--timestamps", s.timestamps, "record wall-clock in simulated traces");
}

std::string default_regime(const std::string& mode)
{
    if (mode == "power_law") return "stochastic_unbounded";
    if (mode == "epsilon") return "deterministic_unbounded";
    return "bounded";
}

Selection parse_selection(const std::string& s)
{
    if (s == "stochastic") return Selection::stochastic;
    if (s == "cyclic") return Selection::cyclic;
    throw std::invalid_argument("unknown selection '" + s + "'");
}

namespace {

std::size_t delay_bound(const ScheduleOptions& s)
{
    if (s.mode == "scripted")
        return s.script.empty() ? 0 : *std::max_element(s.script.begin(), s.script.end());
    return s.tau;
}

DelayPmf stochastic_pmf(const ScheduleOptions& s, std::size_t bound)
{
    if (s.mode == "power_law") return DelayPmf::power_law(s.exponent, s.truncation);
    return DelayPmf::finite(std::vector<double>(bound + 1, 1.0 / static_cast<double>(bound + 1)));
}

double parse_eta(const std::string& text)
{
    double v = 0.0;
    const auto* end = text.data() + text.size();
    const auto [p, ec] = std::from_chars(text.data(), end, v);
    if (ec != std::errc() || p != end || !(v > 0.0))
        throw std::invalid_argument("--eta must be a positive number or 'auto', got '" + text + "'");
    return v;
}

} // namespace

void resolve(RunFlags& f)
{
    auto& m = f.manifest;
    auto& s = m.solver;
    const double L = m.problem.lipschitz.value();
    s.regime = f.regime.value_or(default_regime(m.schedule.mode));
    const std::size_t bound = delay_bound(m.schedule);

    if (f.t1) s.t1 = *f.t1;
    else if (f.t1_frac) s.t1 = preset_threshold(bound, *f.t1_frac);
    else s.t1 = default_threshold(bound);

    if (f.eta != "auto") {
        s.eta = parse_eta(f.eta);
        return;
    }
    const Regime regime = parse_regime(s.regime);
    switch (regime) {
    case Regime::bounded:
        s.eta = stepsize_bounded_feasible(L, s.t1, bound, s.beta, f.safety);
        break;
    case Regime::stochastic_unbounded: {
        const auto c = c_table(stochastic_pmf(m.schedule, bound), s.t1 + 1);
        s.eta = stepsize_unbounded_stochastic(L, c.at(s.t1), s.beta, f.safety);
        break;
    }
    case Regime::deterministic_unbounded: {
        const auto t = mu_delta_tables(make_epsilon(m.schedule), std::max(s.t1, bound));
        s.eta = stepsize_deterministic(L, t.delta_at(0), t.mu_at(s.t1), s.beta, f.step_constant);
        break;
    }
    }
}

ProblemSpec prepare(RunFlags& f)
{
    auto& m = f.manifest;
    if (!f.schedule_file.empty()) {
        m.schedule.script = load_schedule(std::filesystem::path(f.schedule_file));
        if (m.schedule.mode != "scripted")
            throw std::invalid_argument("--schedule-file needs --schedule scripted");
    }
    auto problem = make_problem(m.problem);
    m.dataset_hash = hex(problem.data().content_hash());
    resolve(f);
    return problem;
}

LyapunovSpec lyapunov_for(const RunManifest& m, std::size_t observed_max_delay)
{
    const double L = m.problem.lipschitz.value();
    const double beta = m.solver.beta;
    const std::size_t bound = std::max(delay_bound(m.schedule), observed_max_delay);
    switch (parse_regime(m.solver.regime)) {
    case Regime::bounded: return LyapunovSpec::bounded(L, bound, beta);
    case Regime::stochastic_unbounded: {
        const auto pmf = stochastic_pmf(m.schedule, bound);
        const std::size_t window = std::min<std::size_t>(pmf.support_end(), 10'000) + 1;
        return LyapunovSpec::stochastic(L, c_table(pmf, window), beta);
    }
    case Regime::deterministic_unbounded:
        return LyapunovSpec::deterministic(L, mu_delta_tables(make_epsilon(m.schedule), bound),
                                           beta, bound);
    }
    throw std::logic_error("unhandled regime");
}

} // namespace aapcd::cli
