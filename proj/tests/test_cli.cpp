#include <catch2/catch_amalgamated.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <sys/wait.h>

#include <json.hpp>

#include "trex/csv.hpp"
#include "trex/synth.hpp"

using namespace trex;
namespace fs = std::filesystem;

namespace {

struct RunResult {
    int exit_code = -1;
    std::string err;
};

struct TempDir {
    fs::path path;
    TempDir() {
        static int counter = 0;
        path = fs::temp_directory_path() /
               ("trex_cli_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    std::string file(const std::string& name) const { return (path / name).string(); }
};

RunResult run_cli(const std::string& args, const TempDir& dir) {
    const std::string err_path = dir.file("stderr.txt");
    const std::string cmd = std::string(TREXKIT_BIN) + " " + args + " 2>" + err_path + " >/dev/null";
    const int status = std::system(cmd.c_str());
    RunResult result;
    result.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    std::ifstream err(err_path);
    std::stringstream ss;
    ss << err.rdbuf();
    result.err = ss.str();
    return result;
}

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in.good());
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_planted_csvs(const TempDir& dir, const std::string& x_name, const std::string& y_name,
                        int rows) {
    SystemConfig cfg;
    cfg.n = rows;
    cfg.p = 6;
    cfg.s = 2;
    cfg.snr = 4.0;
    const SyntheticSystem sys = generate_system_usable(cfg, 31);
    std::ofstream x(dir.file(x_name)), y(dir.file(y_name));
    write_matrix_csv(sys.X, x);
    write_matrix_csv(sys.y, y);
}

}  // namespace

TEST_CASE("help exits zero") {
    TempDir dir;
    REQUIRE(run_cli("--help", dir).exit_code == 0);
    REQUIRE(run_cli("select --help", dir).exit_code == 0);
}

TEST_CASE("missing required options are usage errors") {
    TempDir dir;
    const RunResult r = run_cli("evaluate --seed 1 --out " + dir.file("out"), dir);
    REQUIRE(r.exit_code == 2);
    REQUIRE(r.err.find("--model") != std::string::npos);

    REQUIRE(run_cli("", dir).exit_code == 2);                  // subcommand required
    REQUIRE(run_cli("datagen --count 3", dir).exit_code == 2); // seed/out required
    REQUIRE(run_cli("nonsense", dir).exit_code == 2);
}

TEST_CASE("row-mismatched CSVs are data errors naming the files") {
    TempDir dir;
    write_planted_csvs(dir, "x.csv", "y.csv", 30);
    {
        std::ofstream y(dir.file("y_short.csv"));
        y << "1\n0\n1\n";
    }
    const RunResult r = run_cli("select --x " + dir.file("x.csv") + " --y " + dir.file("y_short.csv") +
                                    " --T-max 3 --seed 4 --out " + dir.file("out"),
                                dir);
    REQUIRE(r.exit_code == 3);
    REQUIRE(r.err.find("x.csv") != std::string::npos);
    REQUIRE(r.err.find("y_short.csv") != std::string::npos);
    REQUIRE_FALSE(fs::exists(dir.file("out/report.json")));
}

TEST_CASE("missing input files are data errors") {
    TempDir dir;
    const RunResult r = run_cli("select --x nope.csv --y nope_y.csv --seed 4 --out " +
                                    dir.file("out"),
                                dir);
    REQUIRE(r.exit_code == 3);
}

TEST_CASE("datagen writes a reproducible manifest") {
    TempDir dir;
    const std::string base = "datagen --count 4 --n 10 --p 6 --s 1 --seed 99 ";
    REQUIRE(run_cli(base + "--out " + dir.file("a"), dir).exit_code == 0);
    REQUIRE(run_cli(base + "--out " + dir.file("b"), dir).exit_code == 0);
    const std::string manifest = slurp(dir.file("a/manifest.jsonl"));
    REQUIRE(manifest == slurp(dir.file("b/manifest.jsonl")));
    REQUIRE(std::count(manifest.begin(), manifest.end(), '\n') == 4);
    REQUIRE(fs::exists(dir.file("a/run_manifest.json")));
    REQUIRE_FALSE(fs::exists(dir.file("a/system_0_X.csv")));

    REQUIRE(run_cli(base + "--dump-xy --out " + dir.file("c"), dir).exit_code == 0);
    REQUIRE(fs::exists(dir.file("c/system_0_X.csv")));
    REQUIRE(fs::exists(dir.file("c/system_3_y.csv")));
}

TEST_CASE("select produces a deterministic report") {
    TempDir dir;
    write_planted_csvs(dir, "x.csv", "y.csv", 30);
    const std::string base = "select --x " + dir.file("x.csv") + " --y " + dir.file("y.csv") +
                             " --K 10 --T-max 3 --seed 12 --dump-occurrence ";
    REQUIRE(run_cli(base + "--out " + dir.file("r1"), dir).exit_code == 0);
    REQUIRE(run_cli(base + "--out " + dir.file("r2"), dir).exit_code == 0);
    const std::string report = slurp(dir.file("r1/report.json"));
    REQUIRE(report == slurp(dir.file("r2/report.json")));
    REQUIRE(slurp(dir.file("r1/occurrence.csv")) == slurp(dir.file("r2/occurrence.csv")));

    const auto doc = nlohmann::json::parse(report);
    REQUIRE(doc["estimator"] == "analytical");
    REQUIRE(doc["alpha"] == 0.2);
    REQUIRE(doc["seed"] == 12);
    REQUIRE(doc["p"] == 6);
    REQUIRE(doc.contains("selected"));
    REQUIRE_FALSE(doc.contains("metrics"));
}

TEST_CASE("select reports metrics against a truth file") {
    TempDir dir;
    SystemConfig cfg;
    cfg.n = 40;
    cfg.p = 6;
    cfg.s = 2;
    cfg.snr = 5.0;
    const SyntheticSystem sys = generate_system_usable(cfg, 13);
    {
        std::ofstream x(dir.file("x.csv")), y(dir.file("y.csv")), t(dir.file("truth.txt"));
        write_matrix_csv(sys.X, x);
        write_matrix_csv(sys.y, y);
        for (int j : sys.active_set) t << j << "\n";
    }
    const RunResult r = run_cli("select --x " + dir.file("x.csv") + " --y " + dir.file("y.csv") +
                                    " --truth " + dir.file("truth.txt") +
                                    " --K 10 --T-max 3 --seed 5 --out " + dir.file("out"),
                                dir);
    REQUIRE(r.exit_code == 0);
    const auto doc = nlohmann::json::parse(slurp(dir.file("out/report.json")));
    REQUIRE(doc.contains("metrics"));
    REQUIRE(doc["metrics"]["fdp"].get<double>() >= 0.0);
    REQUIRE(doc["metrics"]["tpp"].get<double>() >= 0.0);
}

TEST_CASE("config file values apply with flag precedence") {
    TempDir dir;
    write_planted_csvs(dir, "x.csv", "y.csv", 30);
    {
        std::ofstream cfg(dir.file("run.ini"));
        cfg << "[select]\n"
            << "K=7\n"
            << "T-max=2\n"
            << "x=" << dir.file("x.csv") << "\n"
            << "y=" << dir.file("y.csv") << "\n";
    }
    const RunResult r = run_cli("--config " + dir.file("run.ini") + " select --seed 3 --K 9 --out " +
                                    dir.file("out"),
                                dir);
    REQUIRE(r.exit_code == 0);
    const auto manifest = nlohmann::json::parse(slurp(dir.file("out/run_manifest.json")));
    REQUIRE(manifest["config"]["K"] == 9);       // flag wins over config file
    REQUIRE(manifest["config"]["T_max"] == 2);   // config file value applied
    REQUIRE(manifest["seed"] == 3);
}

TEST_CASE("the full training pipeline runs end to end at toy scale") {
    TempDir dir;
    const std::string common = " --n 12 --p 6 --s 1 --K 5 --T-max 3 --threads 1";
    REQUIRE(run_cli("build-train-set --count 6 --seed 21 --out " + dir.file("ts") + common, dir)
                .exit_code == 0);
    REQUIRE(fs::exists(dir.file("ts/train_set.txt")));

    REQUIRE(run_cli("train --train-set " + dir.file("ts/train_set.txt") +
                        " --epochs 2 --batch-size 16 --seed 22 --out " + dir.file("model"),
                    dir)
                .exit_code == 0);
    REQUIRE(fs::exists(dir.file("model/model.bin")));
    const std::string trace = slurp(dir.file("model/loss_trace.csv"));
    REQUIRE(trace.rfind("epoch,mean_loss\n", 0) == 0);
    REQUIRE(std::count(trace.begin(), trace.end(), '\n') == 3);

    REQUIRE(run_cli("evaluate --model " + dir.file("model/model.bin") +
                        " --count 4 --seed 23 --out " + dir.file("eval") + common,
                    dir)
                .exit_code == 0);
    const std::string results = slurp(dir.file("eval/results.csv"));
    REQUIRE(results.rfind("method,snr,seed,fdp,tpp,v_star,T_star,n_selected,feasible\n", 0) == 0);
    REQUIRE(std::count(results.begin(), results.end(), '\n') == 9);  // header + 4 systems x 2 methods
    REQUIRE(fs::exists(dir.file("eval/aggregate.csv")));
    REQUIRE(fs::exists(dir.file("eval/surface.csv")));

    // A model narrower than the data is a data validation error.
    const RunResult r = run_cli("evaluate --model " + dir.file("model/model.bin") +
                                    " --count 2 --seed 24 --n 12 --p 50 --s 1 --K 5 --T-max 3 --out " +
                                    dir.file("eval2"),
                                dir);
    REQUIRE(r.exit_code == 3);
    REQUIRE_FALSE(fs::exists(dir.file("eval2/results.csv")));
}
