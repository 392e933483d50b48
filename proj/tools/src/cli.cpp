#include "cli.hpp"

#include "commands.hpp"

#include "aapcd/parameters.hpp"
#include "aapcd/solver.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

namespace aapcd::cli {

namespace {

void add_solve(CLI::App& app, SolveArgs& a)
{
    auto* sub = app.add_subcommand("solve", "run AAPCD and write a trace with its manifest");
    add_run_options(*sub, a.flags);
    sub->add_option("--trace", a.trace, "trace CSV path");
    sub->add_option("--manifest", a.manifest_out, "manifest path");
    sub->add_option("--replay", a.replay, "rerun the configuration stored in a manifest")
        ->check(CLI::ExistingFile);
}

void add_bench(CLI::App& app, BenchArgs& a)
{
    auto* sub = app.add_subcommand("bench", "compare AAPCD with baselines on one problem");
    add_run_options(*sub, a.flags);
    sub->add_option("--methods", a.methods)
        ->delimiter(',')
        ->check(CLI::IsMember({"aapcd", "ascd", "dspg"}));
    sub->add_option("--neg-momentum", a.neg_momentum, "on: beta-neg as given, off: beta-neg = 0")
        ->check(CLI::IsMember({"on", "off", "both"}));
    sub->add_option("--dspg-eta", a.dspg_eta, "DSPG stepsize (default 1/L)");
    sub->add_option("--dspg-batch", a.dspg_batch, "DSPG batch rows (0: all)");
    sub->add_option("--out", a.out, "comparison CSV path");
}

void add_simulate(CLI::App& app, SimulateArgs& a)
{
    auto* sub = app.add_subcommand("simulate", "generate a delay schedule and its series tables");
    add_schedule_options(*sub, a.schedule, a.schedule_file);
    sub->add_option("--iters", a.iterations, "delays to draw");
    sub->add_option("--k-max", a.k_max, "rows of the series tables");
    sub->add_option("--delays", a.delays, "output: one delay per line");
    sub->add_option("--tables", a.tables, "output: series tables CSV");
}

void add_check(CLI::App& app, CheckArgs& a)
{
    auto* sub = app.add_subcommand("check", "replay a trace through the diagnostics");
    auto* trace = sub->add_option("--trace", a.trace, "trace CSV")->check(CLI::ExistingFile);
    sub->add_option("--manifest", a.manifest, "manifest (default <trace>.manifest.json)");
    auto* series = sub->add_option("--series", a.series, "residual series, one value per line")
                       ->check(CLI::ExistingFile)
                       ->excludes(trace);
    sub->add_option("--report", a.report, "JSON-lines report path (default <input>.check.jsonl)");
    sub->add_option("--tolerance", a.tolerance, "relative descent tolerance");
    sub->add_option("--theta", a.theta, "KL exponent for the rate fit");
    sub->add_option("--f-star", a.f_star, "reference optimum for r_k");
    sub->add_option("--fit-first", a.fit_first);
    sub->add_option("--fit-last", a.fit_last);
    sub->add_option("--list-limit", a.list_limit, "violations listed individually");
    sub->callback([trace, series] {
        if (trace->count() + series->count() == 0)
            throw CLI::RequiredError("--trace or --series");
    });
}

} // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err)
{
    CLI::App app{"Asynchronous accelerated proximal coordinate descent"};
    app.set_version_flag("--version", kVersion);
    app.set_config("--config", "", "TOML/INI file with option values; flags win");
    app.require_subcommand(1);

    SolveArgs solve;
    BenchArgs bench;
    SimulateArgs simulate;
    CheckArgs check;
    add_solve(app, solve);
    add_bench(app, bench);
    add_simulate(app, simulate);
    add_check(app, check);

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return exit_ok;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return exit_ok;
    } catch (const CLI::CallForVersion&) {
        out << kVersion << '\n';
        return exit_ok;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << '\n';
        return exit_config;
    }

    try {
        const auto* sub = app.get_subcommands().front();
        const std::string name = sub->get_name();
        if (name == "solve") return cmd_solve(solve, out);
        if (name == "bench") return cmd_bench(bench, out);
        if (name == "simulate") return cmd_simulate(simulate, out);
        return cmd_check(check, out);
    } catch (const DivergenceError& e) {
        err << "diverged: " << e.what() << '\n';
        return exit_divergence;
    } catch (const InfeasibleError& e) {
        err << "infeasible parameters: " << e.what() << '\n';
        return exit_config;
    } catch (const nlohmann::json::exception& e) {
        err << "error: " << e.what() << '\n';
        return exit_config;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return exit_config;
    }
}

} // namespace aapcd::cli
