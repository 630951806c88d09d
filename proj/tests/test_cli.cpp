#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "qbl/qubo.hpp"
#include "qbl/rng.hpp"

namespace {

namespace fs = std::filesystem;

const std::string kCli = QBL_CLI_PATH;

struct RunResult {
    int exit_code = -1;
    std::string output;
};

fs::path work_dir() {
    const auto dir = fs::temp_directory_path() / "qbl_cli_test";
    fs::create_directories(dir);
    return dir;
}

RunResult run(const std::string& args) {
    const fs::path log = work_dir() / "last_output.txt";
    const std::string cmd = kCli + " " + args + " > " + log.string() + " 2>&1";
    const int status = std::system(cmd.c_str());
    RunResult r;
    r.exit_code = WEXITSTATUS(status);
    std::ifstream f(log);
    std::stringstream ss;
    ss << f.rdbuf();
    r.output = ss.str();
    return r;
}

std::string slurp(const fs::path& p) {
    std::ifstream f(p);
    std::stringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

std::string synth_args(const fs::path& dir) {
    return "--prices " + (dir / "prices.csv").string() + " --caps " +
           (dir / "caps.csv").string() + " --indicators " + (dir / "indicators.csv").string() +
           " --riskfree " + (dir / "riskfree.csv").string();
}

const std::string kSmallBacktestFlags =
    " --train-len 80 --test-len 26 --step 26 --budget 3 --label-horizon 26"
    " --vqe-p 2 --vqe-starts 3 --qaoa-p 2 --qaoa-starts 6 --shots 5 --workers 2";

}  // namespace

TEST_CASE("synth-data writes deterministic csv files") {
    const fs::path a = work_dir() / "data_a";
    const fs::path b = work_dir() / "data_b";
    CHECK(run("synth-data --seed 21 --assets 6 --weeks 330 --out " + a.string()).exit_code == 0);
    CHECK(run("synth-data --seed 21 --assets 6 --weeks 330 --out " + b.string()).exit_code == 0);
    for (const char* name : {"prices.csv", "caps.csv", "indicators.csv", "riskfree.csv"}) {
        CHECK(fs::exists(a / name));
        CHECK(slurp(a / name) == slurp(b / name));
    }
}

TEST_CASE("backtest runs end to end and is byte-identical per seed") {
    const fs::path data = work_dir() / "market";
    REQUIRE(run("synth-data --seed 22 --assets 6 --weeks 330 --out " + data.string()).exit_code ==
            0);
    const fs::path out1 = work_dir() / "bt1";
    const fs::path out2 = work_dir() / "bt2";
    const std::string base =
        "backtest " + synth_args(data) + kSmallBacktestFlags + " --seed 5 --out ";
    CHECK(run(base + out1.string()).exit_code == 0);
    CHECK(run(base + out2.string()).exit_code == 0);

    for (const char* name : {"summary.json", "segments.csv", "growth.svg"})
        CHECK(fs::exists(out1 / name));
    CHECK(slurp(out1 / "summary.json") == slurp(out2 / "summary.json"));
    CHECK(!slurp(out1 / "summary.json").empty());

    const auto summary = nlohmann::json::parse(slurp(out1 / "summary.json"));
    for (const char* name : {"bl_vqe", "bl_qaoa", "bl_exact", "mpt_exact", "naive", "index"})
        CHECK(summary["chain"].contains(name));
}

TEST_CASE("a different seed changes the backtest summary") {
    const fs::path data = work_dir() / "market";
    const fs::path out1 = work_dir() / "bt1";
    const fs::path out3 = work_dir() / "bt3";
    REQUIRE(fs::exists(data / "prices.csv"));  // created by the previous case
    CHECK(run("backtest " + synth_args(data) + kSmallBacktestFlags + " --seed 6 --out " +
              out3.string())
              .exit_code == 0);
    CHECK(slurp(out1 / "summary.json") != slurp(out3 / "summary.json"));
}

TEST_CASE("solve: exact method reports AR exactly 1") {
    const fs::path inst_path = work_dir() / "instance.json";
    qbl::Rng rng(23);
    qbl::QuboInstance inst;
    inst.sigma = qbl::SymMatrix(6);
    for (int i = 0; i < 6; ++i)
        for (int j = i; j < 6; ++j)
            inst.sigma.set(i, j, i == j ? rng.uniform(0.02, 0.08) : rng.uniform(-0.01, 0.01));
    inst.mu.resize(6);
    for (double& v : inst.mu) v = rng.uniform(-0.3, 0.3);
    inst.gamma_eff = 0.5;
    inst.lambda = 1.0;
    inst.budget = 3;
    std::ofstream(inst_path) << qbl::instance_to_json(inst).dump(2);

    const RunResult exact = run("solve --instance " + inst_path.string() + " --method exact");
    CHECK(exact.exit_code == 0);
    const auto j = nlohmann::json::parse(exact.output);
    CHECK(j["solution"]["ar"] == 1.0);
    CHECK(j["exact"]["feasible_count"] == 20);  // C(6,3)

    const RunResult vqe = run("solve --instance " + inst_path.string() +
                              " --method vqe --p 2 --starts 4 --seed 3");
    CHECK(vqe.exit_code == 0);
    const auto jv = nlohmann::json::parse(vqe.output);
    CHECK(jv["solution"].contains("ar"));
    CHECK(jv["result"].contains("expectation"));
}

TEST_CASE("solve: malformed instance json exits with code 2") {
    const fs::path bad = work_dir() / "bad.json";
    std::ofstream(bad) << "{ not json";
    const RunResult r = run("solve --instance " + bad.string());
    CHECK(r.exit_code == 2);
}

TEST_CASE("penalty-scan prints one row per lambda and flags the band") {
    const fs::path inst_path = work_dir() / "instance.json";
    REQUIRE(fs::exists(inst_path));
    const RunResult r =
        run("penalty-scan --instance " + inst_path.string() + " --lambdas 0,1,1e6");
    CHECK(r.exit_code == 0);
    CHECK(r.output.find("lambda,lowest_infeasible,fraction_feasible_below,ok") !=
          std::string::npos);
    // lambda = 0 leaves infeasible ground states; 1e6 over-penalizes.
    CHECK(r.output.find("0,") != std::string::npos);
    CHECK(r.output.find("1e+06,") != std::string::npos);

    CHECK(run("penalty-scan --instance " + inst_path.string()).exit_code == 2);
}

TEST_CASE("sample-bound prints the bound and the reach table") {
    const RunResult r = run("sample-bound --pg 1.71e-3 --g 0.95");
    CHECK(r.exit_code == 0);
    CHECK(r.output.find("K = 641") != std::string::npos);
    CHECK(r.output.find("K,prob_reach") != std::string::npos);

    CHECK(run("sample-bound --pg 0").exit_code == 2);
    CHECK(run("sample-bound").exit_code == 2);  // missing required flag
}

TEST_CASE("config file values are overridden by flags") {
    const fs::path data = work_dir() / "market";
    REQUIRE(fs::exists(data / "prices.csv"));
    const fs::path cfg_path = work_dir() / "qbl.cfg";
    {
        std::ofstream cfg(cfg_path);
        cfg << "seed=9\n";
        cfg << "assets=6\n";
        cfg << "weeks=330\n";
    }
    const fs::path out = work_dir() / "cfg_out";
    // seed comes from the file; --out from the flag.
    CHECK(run("synth-data --config " + cfg_path.string() + " --out " + out.string()).exit_code ==
          0);
    const fs::path direct = work_dir() / "cfg_direct";
    CHECK(run("synth-data --seed 9 --assets 6 --weeks 330 --out " + direct.string()).exit_code ==
          0);
    CHECK(slurp(out / "prices.csv") == slurp(direct / "prices.csv"));
}

TEST_CASE("unknown profile is a usage error") {
    const fs::path data = work_dir() / "market";
    const RunResult r = run("backtest " + synth_args(data) + " --profile nope");
    CHECK(r.exit_code == 2);
}
