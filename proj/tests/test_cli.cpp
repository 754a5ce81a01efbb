#include "doctest.h"

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "spreadlab/io.hpp"

namespace {

std::string cli_binary() {
    const char* env = std::getenv("SPREADLAB_CLI");
    return env ? env : "";
}

int run_cli(const std::string& args) {
    const std::string command = cli_binary() + " " + args + " > /dev/null 2>&1";
    const int status = std::system(command.c_str());
    return WEXITSTATUS(status);
}

std::filesystem::path sandbox(const std::string& name) {
    const std::filesystem::path dir = std::filesystem::temp_directory_path() / "spreadlab_cli" / name;
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

void write_file(const std::filesystem::path& file, const std::string& text) {
    std::ofstream out(file);
    out << text;
}

}  // namespace

TEST_CASE("cli: check on a frictionless constant model exits 0 with zero costs") {
    if (cli_binary().empty()) return;
    const std::filesystem::path dir = sandbox("check_flat");
    write_file(dir / "path.csv",
               "t,bid,ask,S\n0,0.5,0.5,0.5\n0.5,0.5,0.5,0.5\n1,0.5,0.5,0.5\n");
    write_file(dir / "phi.csv", "t,phi\n0,0\n0.5,1\n1,0\n");
    const int status = run_cli("--out " + (dir / "out").string() + " check --path " +
                               (dir / "path.csv").string() + " --strategy " +
                               (dir / "phi.csv").string());
    CHECK(status == 0);
    const std::string report = spreadlab::read_text_file((dir / "out" / "check.json").string());
    CHECK(report.find("\"cost_total\": 0.0") != std::string::npos);
    CHECK(report.find("\"pass\": true") != std::string::npos);
}

TEST_CASE("cli: dynkin depth-1 fixture reports value0 = 0.4") {
    if (cli_binary().empty()) return;
    const std::filesystem::path dir = sandbox("dynkin_fixture");
    const int status =
        run_cli("--out " + (dir / "out").string() + " dynkin --fixture depth1");
    CHECK(status == 0);
    const std::string report = spreadlab::read_text_file((dir / "out" / "dynkin.json").string());
    CHECK(report.find("\"value0\": 0.4") != std::string::npos);
}

TEST_CASE("cli: reports are bit-reproducible from the same config") {
    if (cli_binary().empty()) return;
    const std::filesystem::path dir = sandbox("repro");
    const std::string args = " counterexample --steps 500 --paths 200";
    CHECK(run_cli("--seed 11 --out " + (dir / "a").string() + args) == 0);
    CHECK(run_cli("--seed 11 --out " + (dir / "b").string() + args) == 0);
    const std::string a =
        spreadlab::read_text_file((dir / "a" / "counterexample.json").string());
    const std::string b =
        spreadlab::read_text_file((dir / "b" / "counterexample.json").string());
    CHECK(a == b);
}

TEST_CASE("cli: strict mode rejects a missing seed") {
    if (cli_binary().empty()) return;
    const std::filesystem::path dir = sandbox("strict");
    CHECK(run_cli("--strict --out " + (dir / "out").string() +
                  " counterexample --steps 100 --paths 10") != 0);
    CHECK(run_cli("--strict --seed 4 --out " + (dir / "out").string() +
                  " counterexample --steps 100 --paths 10") == 0);
}

TEST_CASE("cli: config file drives subcommand options, unknown keys rejected") {
    if (cli_binary().empty()) return;
    const std::filesystem::path dir = sandbox("config");
    write_file(dir / "run.toml",
               "seed = 21\n\n[counterexample]\nsteps = 300\npaths = 100\n");
    CHECK(run_cli("--config " + (dir / "run.toml").string() + " --out " +
                  (dir / "out").string() + " counterexample") == 0);
    const std::string report =
        spreadlab::read_text_file((dir / "out" / "counterexample.json").string());
    CHECK(report.find("\"steps\": 300") != std::string::npos);
    CHECK(report.find("\"seed\": 21") != std::string::npos);

    write_file(dir / "bad.toml", "[counterexample]\nstepz = 300\n");
    CHECK(run_cli("--config " + (dir / "bad.toml").string() + " --out " +
                  (dir / "out2").string() + " counterexample") != 0);
}

TEST_CASE("cli: generate then cost and invariance round trip") {
    if (cli_binary().empty()) return;
    const std::filesystem::path dir = sandbox("pipeline");
    CHECK(run_cli("--seed 5 --out " + dir.string() +
                  " generate --kind random_walk --steps 32 --spread 0.08") == 0);

    // Build a strategy on the same grid.
    std::ostringstream phi;
    phi << "t,phi\n";
    for (int k = 0; k <= 32; ++k) phi << k / 32.0 << "," << (k % 5 == 2 ? 1.0 : 0.0) << "\n";
    write_file(dir / "phi.csv", phi.str());

    CHECK(run_cli("--out " + dir.string() + " cost --path " + (dir / "path.csv").string() +
                  " --strategy " + (dir / "phi.csv").string()) == 0);
    const std::string cost = spreadlab::read_text_file((dir / "cost.json").string());
    CHECK(cost.find("level_n_star") != std::string::npos);

    CHECK(run_cli("--out " + dir.string() + " invariance --path " +
                  (dir / "path.csv").string() + " --strategy " + (dir / "phi.csv").string() +
                  " --levels 2,4") == 0);
    const std::string invariance =
        spreadlab::read_text_file((dir / "invariance.json").string());
    CHECK(invariance.find("\"exact\": true") != std::string::npos);
}

TEST_CASE("cli: upbr fixture passes and reports tails") {
    if (cli_binary().empty()) return;
    const std::filesystem::path dir = sandbox("upbr");
    CHECK(run_cli("--seed 2 --out " + dir.string() + " upbr --family 5 --depth 6") == 0);
    const std::string report = spreadlab::read_text_file((dir / "upbr.json").string());
    CHECK(report.find("tail_table") != std::string::npos);
    CHECK(report.find("\"pass\": true") != std::string::npos);
}

TEST_CASE("cli: approx sweep on a generated excursion") {
    if (cli_binary().empty()) return;
    const std::filesystem::path dir = sandbox("approx");
    std::ostringstream csv;
    csv << "t,bid,ask,S\n";
    const int n = 48;
    for (int k = 0; k <= n; ++k) {
        const double spread = (k >= 8 && k < 40) ? 0.2 : 0.0;
        csv << k / static_cast<double>(n) << "," << 0.5 - spread / 2 << ","
            << 0.5 + spread / 2 << "," << 0.5 << "\n";
    }
    write_file(dir / "path.csv", csv.str());
    std::ostringstream phi;
    phi << "t,phi\n";
    for (int k = 0; k <= n; ++k) {
        const double v = (k >= 8 && k < 40) ? (k - 8) / 32.0 : 0.0;
        phi << k / static_cast<double>(n) << "," << v << "\n";
    }
    write_file(dir / "phi.csv", phi.str());
    CHECK(run_cli("--out " + dir.string() + " approx --path " + (dir / "path.csv").string() +
                  " --strategy " + (dir / "phi.csv").string() + " --levels 2,4,8") == 0);
    const std::string report = spreadlab::read_text_file((dir / "approx.json").string());
    CHECK(report.find("sup_value_error") != std::string::npos);
}
