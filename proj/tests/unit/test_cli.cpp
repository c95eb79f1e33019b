#include <doctest.h>

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>
#include <unistd.h>

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Result {
    int code = 0;
    std::string out;
};

Result run(const std::string& args) {
    const std::string command = std::string(CREDENCE_CLI_PATH) + " " + args + " 2>&1";
    Result r;
    FILE* pipe = popen(command.c_str(), "r");
    REQUIRE(pipe != nullptr);
    char buffer[4096];
    while (std::fgets(buffer, sizeof buffer, pipe)) r.out += buffer;
    const int status = pclose(pipe);
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return r;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

std::vector<std::vector<std::string>> read_rows(const fs::path& p) {
    std::ifstream in(p);
    std::vector<std::vector<std::string>> rows;
    std::string line;
    while (std::getline(in, line)) {
        std::vector<std::string> cells;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) cells.push_back(cell);
        rows.push_back(cells);
    }
    return rows;
}

double printed(const std::string& out, const std::string& key) {
    const auto pos = out.find(key + ":");
    REQUIRE(pos != std::string::npos);
    return std::stod(out.substr(pos + key.size() + 1));
}

struct Workspace {
    fs::path root = fs::temp_directory_path() / ("credence_cli_" + std::to_string(::getpid()));
    Workspace() {
        fs::remove_all(root);
        fs::create_directories(root);
        std::ofstream(root / "fast.json") << R"({"credence": {"epochs": 4, "hidden": [8]},
            "benchmark": {"replicates": 2, "n": 200}, "estimators": {"methods": ["diff_means", "ipw"]}})";
    }
    ~Workspace() { fs::remove_all(root); }
    std::string out(const std::string& name) const { return "--out " + (root / name).string(); }
    std::string config() const { return "--config " + (root / "fast.json").string(); }
};

} // namespace

TEST_CASE("simulate") {
    Workspace w;
    const auto r = run(w.out("a") + " --seed 7 simulate --dgp friedman --n 2500");
    REQUIRE(r.code == 0);
    CHECK(std::abs(printed(r.out, "oracle_ate") - 0.2947) < 0.005);
    CHECK(fs::exists(w.root / "a" / "simulated.csv"));
    CHECK(fs::exists(w.root / "a" / "observed.csv"));
    const auto header = read_rows(w.root / "a" / "simulated.csv").front();
    CHECK(header.back() == "y1");
    CHECK(read_rows(w.root / "a" / "observed.csv").front().back() == "y");

    REQUIRE(run(w.out("b") + " --seed 7 --quiet simulate --dgp friedman --n 2500").code == 0);
    CHECK(slurp(w.root / "a" / "simulated.csv") == slurp(w.root / "b" / "simulated.csv"));
    CHECK(slurp(w.root / "a" / "observed.csv") == slurp(w.root / "b" / "observed.csv"));

    CHECK(run(w.out("c") + " simulate --dgp").code != 0);
    CHECK(run(w.out("c") + " simulate --dgp ihdp").code == 1);
    const auto sidecar = json::parse(slurp(w.root / "a" / "simulate.json"));
    CHECK(sidecar.at("seed") == 7);
    CHECK(sidecar.contains("config"));
}

TEST_CASE("train, generate, estimate and diagnose") {
    Workspace w;
    const std::string dir = (w.root / "run").string();
    REQUIRE(run(w.config() + " " + w.out("run") + " --quiet simulate --dgp quadratic --n 300").code == 0);
    const auto trained = run(w.config() + " " + w.out("run") + " train --alpha 0 --beta 0 --data " + dir + "/observed.csv");
    REQUIRE(trained.code == 0);
    const auto model = json::parse(slurp(w.root / "run" / "model.json"));
    CHECK(model.at("format_version") == 1);
    CHECK(model.at("config").at("alpha") == 0.0);
    CHECK(model.at("config").at("beta") == 0.0);
    const auto loss = read_rows(w.root / "run" / "loss.csv");
    CHECK(loss.size() == 5);
    CHECK(loss.front() == std::vector<std::string>{"epoch", "loss_x", "loss_y", "y_reconstruction", "y_kl", "y_effect", "y_bias"});

    const auto gen = run(w.config() + " " + w.out("run") + " generate --model " + dir + "/model.json --n 100");
    REQUIRE(gen.code == 0);
    const auto rows = read_rows(w.root / "run" / "generated.csv");
    REQUIRE(rows.size() == 101);
    const auto& header = rows.front();
    const auto col = [&](const std::string& name) {
        return static_cast<std::size_t>(std::find(header.begin(), header.end(), name) - header.begin());
    };
    double diff = 0.0;
    for (std::size_t i = 1; i < rows.size(); ++i) diff += std::stod(rows[i][col("y1")]) - std::stod(rows[i][col("y0")]);
    CHECK(printed(gen.out, "true_ate") == doctest::Approx(diff / 100.0).epsilon(1e-9));
    CHECK(col("z") < header.size());
    CHECK(col("y") < header.size());
    const auto first = slurp(w.root / "run" / "generated.csv");
    REQUIRE(run(w.config() + " " + w.out("run") + " --quiet generate --model " + dir + "/model.json --n 100").code == 0);
    CHECK(slurp(w.root / "run" / "generated.csv") == first);

    REQUIRE(run(w.config() + " " + w.out("run") + " --quiet estimate --data " + dir + "/observed.csv").code == 0);
    const auto est = read_rows(w.root / "run" / "estimates.csv");
    CHECK(est.front() == std::vector<std::string>{"method", "ate", "se", "diagnostics"});
    CHECK(est.size() == 3);
    const auto unknown = run(w.config() + " " + w.out("run") + " estimate --methods bart --data " + dir + "/observed.csv");
    CHECK(unknown.code == 1);
    CHECK(unknown.out.find("diff_means") != std::string::npos);

    REQUIRE(run(w.out("run") + " --quiet diagnose --real " + dir + "/observed.csv --synth " + dir + "/observed.csv").code == 0);
    const auto diag = json::parse(slurp(w.root / "run" / "diagnostics.json"));
    CHECK(diag.at("correlation_frobenius") == 0.0);
    CHECK(diag.at("energy_distance") == 0.0);
    CHECK(diag.at("n_real") == 300);
    CHECK(diag.at("n_synth") == 300);
    const auto missing = run(w.out("run") + " diagnose --real " + dir + "/nope.csv --synth " + dir + "/observed.csv");
    CHECK(missing.code != 0);
    CHECK(!missing.out.empty());
}

TEST_CASE("benchmark") {
    Workspace w;
    REQUIRE(run(w.config() + " " + w.out("b") + " --quiet benchmark --generator dgp:quadratic").code == 0);
    const auto rows = read_rows(w.root / "b" / "benchmark.csv");
    CHECK(rows.size() == 3);
    CHECK(rows.front().front() == "method");
    const auto report = json::parse(slurp(w.root / "b" / "benchmark.json"));
    CHECK(report.at("report").contains("replicate_seeds"));

    REQUIRE(run(w.config() + " " + w.out("b") + " --quiet simulate --dgp quadratic --n 200").code == 0);
    REQUIRE(run(w.config() + " " + w.out("b") + " --quiet train --data " + (w.root / "b" / "observed.csv").string()).code == 0);
    const auto cmp = run(w.config() + " " + w.out("b") + " benchmark --compare oracle " + (w.root / "b" / "model.json").string());
    REQUIRE(cmp.code == 0);
    const double tau = printed(cmp.out, "kendall_tau");
    CHECK(tau >= -1.0);
    CHECK(tau <= 1.0);

    const auto first = slurp(w.root / "b" / "benchmark_oracle.csv");
    REQUIRE(run(w.config() + " " + w.out("b") + " --quiet benchmark --compare oracle " + (w.root / "b" / "model.json").string()).code == 0);
    CHECK(slurp(w.root / "b" / "benchmark_oracle.csv") == first);
}

TEST_CASE("exit codes") {
    Workspace w;
    CHECK(run("").code == 1);
    CHECK(run("frobnicate").code == 1);
    CHECK(run(w.out("x") + " estimate --data /nonexistent.csv").code == 1);
    std::ofstream(w.root / "nonbinary.csv") << "x,z,y\n1,2,3\n2,0,1\n";
    CHECK(run(w.out("x") + " estimate --data " + (w.root / "nonbinary.csv").string()).code == 2);
    std::ofstream(w.root / "bad.json") << R"({"credence": {"epochs": 0}})";
    CHECK(run("--config " + (w.root / "bad.json").string() + " " + w.out("x") + " simulate --dgp quadratic").code == 1);
    // a treatment that x predicts exactly makes least-squares partialling out fail
    std::ofstream(w.root / "sep.csv") << "x,z,y\n0,0,1\n0,0,2\n1,1,3\n1,1,5\n0,0,1\n1,1,4\n";
    std::ofstream(w.root / "exact.json") << R"({"estimators": {"ridge_lambda": 0, "folds": 2}})";
    const auto numeric = run("--config " + (w.root / "exact.json").string() + " " + w.out("x") +
                             " estimate --methods dml_linear --data " + (w.root / "sep.csv").string());
    CHECK(numeric.code == 0);
    CHECK(slurp(w.root / "x" / "estimates.csv").find("error") != std::string::npos);
}
