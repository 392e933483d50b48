#include "cli.hpp"
#include "run_spec.hpp"

#include "aapcd/trace.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace fs = std::filesystem;
using namespace aapcd::cli;

namespace {

class Cli : public ::testing::Test {
protected:
    void SetUp() override
    {
        dir = fs::temp_directory_path() /
              ("aapcd_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
        fs::remove_all(dir);
        fs::create_directories(dir);
    }
    void TearDown() override { fs::remove_all(dir); }

    int run(std::vector<std::string> args)
    {
        out.str("");
        err.str("");
        return run_cli(args, out, err);
    }
    std::string path(const std::string& name) const { return (dir / name).string(); }

    fs::path dir;
    std::ostringstream out, err;
};

std::string read_file(const std::string& p)
{
    std::ifstream in(p);
    std::stringstream s;
    s << in.rdbuf();
    return s.str();
}

} // namespace

TEST(Manifest, RoundTrip)
{
    RunManifest m;
    m.command = "solve";
    m.problem.synthetic = "regression";
    m.problem.lambda = 0.1 + 1e-17;
    m.problem.lipschitz = 1.0 / 3.0;
    m.solver.eta = 0.060633582069274439;
    m.solver.beta_neg = -0.08;
    m.solver.read = "inconsistent";
    m.solver.read_seed = 99;
    m.schedule.mode = "scripted";
    m.schedule.script = {0, 3, 1};
    m.schedule.eps_truncation = 8;
    m.dataset_hash = hex(0x0123456789abcdefULL);
    m.initial_objective = std::log(2.0);
    m.started = "2026-01-01T00:00:00Z";
    const auto j = nlohmann::json(m);
    EXPECT_EQ(j.get<RunManifest>(), m);
    EXPECT_EQ(nlohmann::json::parse(j.dump()).get<RunManifest>(), m);

    RunManifest unset;
    EXPECT_EQ(nlohmann::json(unset).get<RunManifest>(), unset);
}

TEST_F(Cli, ExperimentPresetSolves)
{
    const auto trace = path("t.csv");
    ASSERT_EQ(run({"solve", "--loss", "logistic", "--reg", "capped_l1", "--lambda", "1e-4",
                   "--theta-cap", "1e-5", "--beta", "0.8", "--beta-neg", "-0.08", "--eta", "0.08",
                   "--t1-frac", "0.9", "--iters", "500", "--trace", trace}),
              0)
        << err.str();
    EXPECT_NE(out.str().find("F: "), std::string::npos);
    EXPECT_NE(out.str().find("max_stationarity: "), std::string::npos);
    const auto m = read_manifest(trace + ".manifest.json");
    EXPECT_EQ(m.solver.t1, 7u); // round(0.9 * 8)
    EXPECT_EQ(m.solver.eta, 0.08);
    EXPECT_EQ(m.solver.beta_neg, -0.08);
    EXPECT_EQ(aapcd::read_trace_csv(trace).records.size(), 500u);
}

TEST_F(Cli, ZeroIterationsEchoesInitialObjective)
{
    const auto trace = path("t.csv");
    ASSERT_EQ(run({"solve", "--iters", "0", "--trace", trace}), 0) << err.str();
    EXPECT_NE(out.str().find("F0: 0.69314718055994"), std::string::npos);
    const auto t = aapcd::read_trace_csv(trace);
    EXPECT_TRUE(t.records.empty());
    EXPECT_NEAR(t.initial_objective, std::log(2.0), 1e-14); // mean of 200 logs
}

TEST_F(Cli, ReplayReproducesTraceBytes)
{
    const auto a = path("a.csv"), b = path("b.csv");
    for (const char* schedule : {"bounded", "power_law", "epsilon"}) {
        ASSERT_EQ(run({"solve", "--schedule", schedule, "--iters", "800", "--read", "inconsistent",
                       "--read-seed", "4", "--seed", "12", "--trace", a}),
                  0)
            << err.str();
        ASSERT_EQ(run({"solve", "--replay", a + ".manifest.json", "--trace", b}), 0) << err.str();
        EXPECT_EQ(aapcd::file_hash(a), aapcd::file_hash(b)) << schedule;
    }
}

TEST_F(Cli, ConfigErrorsExitOne)
{
    EXPECT_EQ(run({"solve", "--eta", "fast"}), 1);
    EXPECT_EQ(run({"solve", "--no-such-flag"}), 1);
    EXPECT_EQ(run({"solve", "--loss", "hinge"}), 1);
    EXPECT_EQ(run({"solve", "--data", path("missing.svm")}), 1);
    EXPECT_EQ(run({}), 1);
    EXPECT_EQ(run({"solve", "--t1", "3", "--t1-frac", "0.5"}), 1);
    EXPECT_EQ(run({"solve", "--beta-neg", "-1.5", "--trace", path("x.csv")}), 1);
}

TEST_F(Cli, DivergenceExitsTwo)
{
    EXPECT_EQ(run({"solve", "--synthetic", "regression", "--loss", "quadratic", "--reg", "l1",
                   "--lambda", "0.1", "--eta", "100", "--iters", "500", "--trace", path("d.csv")}),
              2);
    EXPECT_NE(err.str().find("diverged"), std::string::npos);
}

TEST_F(Cli, CheckCompliantAndPlanted)
{
    const auto good = path("good.csv"), bad = path("bad.csv");
    ASSERT_EQ(run({"solve", "--tau", "8", "--t1", "4", "--beta-neg", "-0.08", "--iters", "2000",
                   "--trace", good}),
              0);
    EXPECT_EQ(run({"check", "--trace", good}), 0);
    EXPECT_NE(out.str().find("0 violations"), std::string::npos);

    ASSERT_EQ(run({"solve", "--tau", "8", "--t1", "4", "--beta-neg", "-0.6", "--eta", "0.5",
                   "--iters", "3000", "--trace", bad}),
              0);
    EXPECT_EQ(run({"check", "--trace", bad, "--report", path("r.jsonl")}), 3);
    EXPECT_EQ(out.str().find("0 violations"), std::string::npos);
    std::ifstream report(path("r.jsonl"));
    std::string line;
    std::size_t lines = 0, violations = 0;
    while (std::getline(report, line)) {
        const auto j = nlohmann::json::parse(line);
        ++lines;
        if (j.at("kind") == "violation") ++violations;
    }
    EXPECT_GT(violations, 0u);
    EXPECT_GT(lines, violations);
}

TEST_F(Cli, CheckFitsSeries)
{
    const auto series = path("r.txt");
    {
        std::ofstream f(series);
        f << "# geometric\n";
        for (int k = 0; k < 40; ++k) f << std::pow(0.8, k) << '\n';
    }
    ASSERT_EQ(run({"check", "--series", series}), 0) << err.str();
    EXPECT_NE(out.str().find("contraction: 0.8"), std::string::npos) << out.str();
    EXPECT_EQ(run({"check"}), 1);
}

TEST_F(Cli, BenchAlignsSeries)
{
    const auto csv = path("bench.csv");
    ASSERT_EQ(run({"bench", "--synthetic", "regression", "--loss", "quadratic", "--reg", "l1",
                   "--lambda", "0.1", "--iters", "200", "--out", csv}),
              0)
        << err.str();
    std::ifstream in(csv);
    std::string header;
    std::getline(in, header);
    EXPECT_EQ(header, "k,aapcd_ns,aapcd_F,ascd_ns,ascd_F,dspg_ns,dspg_F");
    std::size_t rows = 0;
    for (std::string line; std::getline(in, line);) ++rows;
    EXPECT_EQ(rows, 201u);
    EXPECT_TRUE(fs::exists(csv + ".manifest.json"));

    ASSERT_EQ(run({"bench", "--methods", "aapcd", "--iters", "50", "--out", csv}), 0);
    std::ifstream single(csv);
    std::getline(single, header);
    EXPECT_EQ(header, "k,aapcd_ns,aapcd_F");

    ASSERT_EQ(run({"bench", "--methods", "aapcd", "--neg-momentum", "both", "--iters", "50",
                   "--out", csv}),
              0);
    std::ifstream both(csv);
    std::getline(both, header);
    EXPECT_EQ(header, "k,aapcd_ns,aapcd_F,aapcd_beta_neg0_ns,aapcd_beta_neg0_F");
}

TEST_F(Cli, SimulateWritesScheduleAndTables)
{
    const auto delays = path("d.txt"), tables = path("c.csv");
    ASSERT_EQ(run({"simulate", "--schedule", "bounded", "--tau", "3", "--iters", "100", "--k-max",
                   "5", "--delays", delays, "--tables", tables}),
              0)
        << err.str();
    std::ifstream d(delays);
    std::size_t n = 0;
    for (std::size_t v; d >> v;) {
        EXPECT_LE(v, 3u);
        ++n;
    }
    EXPECT_EQ(n, 100u);
    const auto text = read_file(tables);
    EXPECT_EQ(text.substr(0, text.find('\n')), "k,p_k,c_k,c_tail_bound,c_series_tail");
    EXPECT_TRUE(fs::exists(delays + ".manifest.json"));

    ASSERT_EQ(run({"simulate", "--schedule", "epsilon", "--rho", "0.5", "--tau", "4", "--k-max",
                   "3", "--delays", delays, "--tables", tables}),
              0);
    EXPECT_NE(read_file(tables).find("3,0.125,0.25,7"), std::string::npos);

    // The generated file drives a scripted solve.
    ASSERT_EQ(run({"simulate", "--tau", "3", "--iters", "100", "--delays", delays, "--tables", tables}), 0);
    EXPECT_EQ(run({"solve", "--schedule", "scripted", "--schedule-file", delays, "--iters", "100",
                   "--trace", path("s.csv")}),
              0)
        << err.str();
    EXPECT_EQ(run({"simulate", "--schedule", "measured"}), 1);
}

TEST_F(Cli, ConfigFileLosesToFlags)
{
    const auto cfg = path("run.toml");
    {
        std::ofstream f(cfg);
        f << "[solve]\niters = 25\nbeta = 0.5\nseed = 3\n";
    }
    const auto trace = path("t.csv");
    ASSERT_EQ(run({"--config", cfg, "solve", "--beta", "0.7", "--trace", trace}), 0) << err.str();
    const auto m = read_manifest(trace + ".manifest.json");
    EXPECT_EQ(m.solver.iterations, 25u);
    EXPECT_EQ(m.solver.seed, 3u);
    EXPECT_EQ(m.solver.beta, 0.7);
}
