#include "commands.hpp"

#include <algorithm>
#include <charconv>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <stdexcept>

namespace aapcd::cli {

namespace {

void put_double(std::ostream& out, double v)
{
    char buf[32];
    const auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
    out.write(buf, end - buf);
}

DelayPmf schedule_pmf(const DelaySchedule& s)
{
    switch (s.mode()) {
    case DelayMode::power_law: return s.pmf();
    case DelayMode::bounded: {
        const std::size_t n = *s.bound() + 1;
        return DelayPmf::finite(std::vector<double>(n, 1.0 / static_cast<double>(n)));
    }
    case DelayMode::scripted: {
        std::vector<double> p(*s.bound() + 1, 0.0);
        for (auto d : s.script()) p[d] += 1.0 / static_cast<double>(s.script().size());
        return DelayPmf::finite(std::move(p));
    }
    default: break;
    }
    throw std::invalid_argument("no delay distribution for schedule " + to_string(s.mode()));
}

void write_c_tables(std::ostream& out, const DelayPmf& pmf, std::size_t k_max)
{
    const auto t = c_table(pmf, k_max);
    out << "k,p_k,c_k,c_tail_bound,c_series_tail\n";
    for (std::size_t k = 0; k < k_max; ++k) {
        out << k << ',';
        put_double(out, pmf(k));
        out << ',';
        put_double(out, t.at(k));
        out << ',';
        put_double(out, k < t.tail_bound.size() ? t.tail_bound[k] : 0.0);
        out << ',';
        put_double(out, k < t.series_tail.size() ? t.series_tail[k] : 0.0);
        out << '\n';
    }
}

void write_mu_delta(std::ostream& out, const EpsilonSpec& eps, std::size_t k_max)
{
    const auto t = mu_delta_tables(eps, k_max);
    out << "i,eps_i,delta_i,mu_i\n";
    for (std::size_t i = 0; i <= k_max; ++i) {
        out << i << ',';
        put_double(out, eps.at(i));
        out << ',';
        put_double(out, t.delta_at(i));
        out << ',';
        put_double(out, t.mu_at(i));
        out << '\n';
    }
}

} // namespace

int cmd_simulate(SimulateArgs& a, std::ostream& out)
{
    if (!a.schedule_file.empty())
        a.schedule.script = load_schedule(std::filesystem::path(a.schedule_file));
    if (a.schedule.mode == "measured")
        throw std::invalid_argument("measured delays come from the real engine; use solve");

    RunManifest m;
    m.command = "simulate";
    m.schedule = a.schedule;
    m.solver.iterations = a.iterations;
    m.solver.regime = default_regime(a.schedule.mode);
    m.started = utc_now();

    auto schedule = make_schedule(a.schedule);
    std::vector<std::size_t> delays(a.iterations);
    for (std::size_t k = 0; k < a.iterations; ++k) delays[k] = schedule.next_delay(k);
    {
        std::ofstream f(a.delays);
        if (!f) throw std::runtime_error("cannot write " + a.delays);
        save_schedule(f, delays);
    }
    {
        std::ofstream f(a.tables);
        if (!f) throw std::runtime_error("cannot write " + a.tables);
        if (schedule.mode() == DelayMode::epsilon_sequence)
            write_mu_delta(f, schedule.epsilon(), a.k_max);
        else
            write_c_tables(f, schedule_pmf(schedule), a.k_max);
    }
    m.finished = utc_now();
    write_manifest(a.delays + ".manifest.json", m);
    write_manifest(a.tables + ".manifest.json", m);

    double mean = 0.0;
    std::size_t max = 0;
    for (auto d : delays) {
        mean += static_cast<double>(d);
        max = std::max(max, d);
    }
    if (!delays.empty()) mean /= static_cast<double>(delays.size());
    out << std::setprecision(17);
    out << "delays: " << delays.size() << '\n';
    out << "mean_delay: " << mean << '\n';
    out << "max_delay: " << max << '\n';
    return 0;
}

} // namespace aapcd::cli
