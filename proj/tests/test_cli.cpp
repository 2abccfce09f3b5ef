#include <sys/wait.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "json.hpp"

namespace fs = std::filesystem;

namespace {

struct Run {
    int status = -1;
    std::string out;  // stdout, then stderr
};

Run cli(const std::string& args) {
    const std::string cmd = std::string(SPECANN_CLI) + " " + args + " 2>&1";
    Run r;
    FILE* p = popen(cmd.c_str(), "r");
    REQUIRE(p != nullptr);
    char buf[4096];
    while (std::size_t n = fread(buf, 1, sizeof buf, p)) r.out.append(buf, n);
    const int st = pclose(p);
    r.status = WIFEXITED(st) ? WEXITSTATUS(st) : -1;
    return r;
}

std::string scenario(const std::string& name) { return std::string(SPECANN_SCENARIOS) + "/" + name; }

std::string slurp(const fs::path& p) {
    std::ifstream f(p, std::ios::binary);
    std::stringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

std::vector<std::vector<std::string>> csv_rows(const std::string& text) {
    std::vector<std::vector<std::string>> rows;
    std::stringstream ss(text);
    std::string line;
    std::getline(ss, line);
    CHECK(line == "detector,vector_id,eps,value_re,value_im,norm");
    while (std::getline(ss, line)) {
        std::vector<std::string> cells;
        std::stringstream ls(line);
        std::string c;
        while (std::getline(ls, c, ',')) cells.push_back(c);
        REQUIRE(cells.size() == 6);
        rows.push_back(cells);
    }
    return rows;
}

fs::path scratch(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("specann_cli_" + name);
    fs::remove_all(p);
    return p;
}

}  // namespace

TEST_CASE("trace of a unit atom follows the 2 pi / eps law") {
    const Run r = cli("trace --config " + scenario("atom_unit.json") + " --detector smirnov_strong --vector atom0");
    REQUIRE(r.status == 0);
    const auto rows = csv_rows(r.out);
    REQUIRE(rows.size() == 7);
    for (const auto& row : rows) {
        CHECK(row[0] == "smirnov_strong");
        CHECK(row[1] == "atom0");
        const double eps = std::stod(row[2]), norm = std::stod(row[5]);
        CHECK(norm * norm == doctest::Approx(2.0 * M_PI / eps).epsilon(0.01));
    }
}

TEST_CASE("bump trace of a Cantor vector decreases") {
    const Run r = cli("trace --config " + scenario("zoo/cantor_in_delta.json") + " --detector weak_thm3 --vector cantor0");
    REQUIRE(r.status == 0);
    const auto rows = csv_rows(r.out);
    REQUIRE(rows.size() == 7);
    for (std::size_t i = 1; i < rows.size(); ++i) CHECK(std::stod(rows[i][5]) < std::stod(rows[i - 1][5]));
}

TEST_CASE("config and usage errors exit with 2") {
    const Run empty = cli("trace --config " + scenario("atom_unit.json") +
                          " --detector smirnov_strong --vector atom0 --eps-ladder ''");
    CHECK(empty.status == 2);
    CHECK(empty.out.find("empty") != std::string::npos);
    CHECK(cli("trace --config " + scenario("atom_unit.json") + " --detector smirnov_strong --vector atom0 --eps-ladder 0.1,x")
              .status == 2);
    CHECK(cli("trace --config " + scenario("atom_unit.json") + " --detector nope --vector atom0").status == 2);
    CHECK(cli("trace --config " + scenario("atom_unit.json") + " --detector smirnov_strong --vector ac0").status == 2);
    CHECK(cli("classify --config " + scenario("absent.json")).status == 2);
    CHECK(cli("frobnicate").status == 2);
    CHECK(cli("").status == 2);

    const fs::path dir = scratch("nogap");
    fs::create_directories(dir);
    std::string text = slurp(scenario("zoo/atoms_gap.json"));
    const auto at = text.find("\"delta0\": 0.25");
    REQUIRE(at != std::string::npos);
    text.replace(at, 14, "");
    std::ofstream(dir / "nogap.json") << text;
    const Run r = cli("annihilate --config " + (dir / "nogap.json").string());
    CHECK(r.status == 2);
    CHECK(r.out.find("spectral gap") != std::string::npos);
    fs::remove_all(dir);
}

TEST_CASE("annihilate writes the report, pair traces and tables") {
    const fs::path dir = scratch("annihilate");
    const Run r = cli("annihilate --config " + scenario("zoo/atoms_gap.json") + " --out " + dir.string() + " --tables");
    REQUIRE(r.status == 0);
    const auto report = nlohmann::json::parse(slurp(dir / "report.json"));
    CHECK(report["scenario_id"] == "atoms_gap");
    CHECK(report["verdicts"][0]["verdict"] == "singular");
    CHECK(report["runtime_ms"].is_null());
    std::vector<std::string> keys;
    for (const auto& [k, v] : report.items()) keys.push_back(k);
    CHECK(keys.size() == 5);
    for (const auto& e : report["verdicts"][0]["evidence"]) {
        CHECK(e.contains("detector"));
        CHECK(e.contains("slope"));
        CHECK(e.contains("residual"));
    }
    // atom0, atom1, rand0, rand1 pairwise, seven eps each
    CHECK(csv_rows(slurp(dir / "annihilation.csv")).size() == 16 * 7);
    CHECK(!csv_rows(slurp(dir / "traces.csv")).empty());
    CHECK(fs::exists(dir / "tables" / "gamma_line.csv"));
    CHECK(fs::exists(dir / "tables" / "gamma_a_boundary.csv"));
    CHECK_FALSE(fs::exists(dir / "tables" / "beta_boundary.csv"));
    fs::remove_all(dir);
}

TEST_CASE("classify flat AC and the timing flag") {
    const Run r = cli("classify --config " + scenario("ac_flat.json"));
    REQUIRE(r.status == 0);
    const auto report = nlohmann::json::parse(r.out);
    CHECK(report["verdicts"][0]["verdict"] == "absolutely-continuous");
    CHECK(report["mode"] == "thm3");

    const Run timed = cli("classify --timing --config " + scenario("ac_flat.json"));
    REQUIRE(timed.status == 0);
    CHECK(nlohmann::json::parse(timed.out)["runtime_ms"].is_number());
}

TEST_CASE("reports are byte-identical across runs") {
    const std::string base = "classify --config " + scenario("zoo/mix_atom_ac.json") + " --seed 7 --out ";
    const fs::path a = scratch("det_a"), b = scratch("det_b");
    REQUIRE(cli(base + a.string()).status == 0);
    REQUIRE(cli(base + b.string()).status == 0);
    CHECK(slurp(a / "report.json") == slurp(b / "report.json"));
    CHECK(slurp(a / "traces.csv") == slurp(b / "traces.csv"));
    CHECK(slurp(a / "report.json").find("\"seed\": 7") != std::string::npos);
    fs::remove_all(a);
    fs::remove_all(b);
}

TEST_CASE("smirnov command filters by vector and detector") {
    const Run r = cli("smirnov --config " + scenario("atom_unit.json") + " --vector atom0 --detector smirnov_weak");
    REQUIRE(r.status == 0);
    const auto rows = csv_rows(r.out);
    REQUIRE(rows.size() == 7);
    for (const auto& row : rows) CHECK(row[0] == "smirnov_weak");
    CHECK(cli("smirnov --config " + scenario("atom_unit.json") + " --vector zzz").status == 2);
}
