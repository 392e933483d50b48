#pragma once

#include "options.hpp"

#include <ostream>
#include <string>

namespace aapcd::cli {

struct SolveArgs {
    RunFlags flags;
    std::string trace = "trace.csv";
    std::string manifest_out; ///< default: <trace>.manifest.json
    std::string replay;
};

struct BenchArgs {
    RunFlags flags;
    std::vector<std::string> methods{"aapcd", "ascd", "dspg"};
    std::string neg_momentum = "on"; ///< on | off | both
    double dspg_eta = 0.0;           ///< 0: 1/L
    std::size_t dspg_batch = 0;
    std::string out = "bench.csv";
};

struct SimulateArgs {
    ScheduleOptions schedule;
    std::string schedule_file;
    std::size_t iterations = 1000;
    std::size_t k_max = 50;
    std::string delays = "delays.txt";
    std::string tables = "tables.csv";
};

struct CheckArgs {
    std::string trace;
    std::string manifest;
    std::string series;
    std::string report; ///< JSON-lines; <input>.check.jsonl when empty
    double tolerance = 1e-12;
    std::optional<double> theta;
    std::optional<double> f_star;
    std::optional<std::size_t> fit_first;
    std::optional<std::size_t> fit_last;
    std::size_t list_limit = 100;
};

int cmd_solve(SolveArgs& args, std::ostream& out);
int cmd_bench(BenchArgs& args, std::ostream& out);
int cmd_simulate(SimulateArgs& args, std::ostream& out);
int cmd_check(CheckArgs& args, std::ostream& out);

} // namespace aapcd::cli
