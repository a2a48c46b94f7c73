#include <sys/wait.h>
#include <unistd.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <regex>
#include <sstream>
#include <string>

#include "doctest.h"
#include "json.hpp"

namespace fs = std::filesystem;

namespace {

const fs::path& scratch() {
    static const fs::path dir = [] {
        const fs::path d = fs::temp_directory_path() / ("hsmf_cli_test_" + std::to_string(::getpid()));
        fs::remove_all(d);
        fs::create_directories(d);
        return d;
    }();
    return dir;
}

// Runs the CLI; stdout goes to `capture` when given.
int run(const std::string& args, const fs::path& capture = {}) {
    std::string cmd = std::string("\"") + HSMF_CLI_PATH + "\" " + args;
    cmd += capture.empty() ? " > /dev/null" : " > \"" + capture.string() + "\"";
    cmd += " 2> /dev/null";
    const int rc = std::system(cmd.c_str());
    return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

std::string spec(const std::string& name) { return std::string("\"") + HSMF_SPEC_DIR + "/" + name + "\""; }

std::vector<std::vector<std::string>> csv_rows(const fs::path& p) {
    std::ifstream in(p);
    std::string line;
    std::vector<std::vector<std::string>> rows;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::vector<std::string> cells;
        std::stringstream ls(line);
        std::string c;
        while (std::getline(ls, c, ',')) cells.push_back(c);
        rows.push_back(cells);
    }
    return rows;
}

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("validate") {
    const fs::path out = scratch() / "validate.json";
    CHECK(run("validate --spec " + spec("uniform.json"), out) == 0);
    CHECK(nlohmann::json::parse(slurp(out))["valid"] == true);

    const fs::path bad = scratch() / "bad.json";
    std::ofstream(bad) << R"({"families": [{"probs": [0.5, 0.6], "ratios": [0.5, 0.5]}],
        "schedule": {"type": "constant", "family": 0}, "gap_policy": "no_gaps", "depth_cap": 8})";
    CHECK(run("validate --spec \"" + bad.string() + "\"", out) == 1);
    const auto report = nlohmann::json::parse(slurp(out));
    CHECK(report["valid"] == false);
    CHECK(report["violations"][0]["code"] == "NonProbabilityVector");

    const fs::path mal = scratch() / "malformed.json";
    std::ofstream(mal) << "{ not json";
    CHECK(run("validate --spec \"" + mal.string() + "\"") == 2);
    CHECK(run("validate") == 2);
    CHECK(run("frobnicate") == 2);
    CHECK(run("") == 2);
}

TEST_CASE("dims on the uniform measure") {
    const fs::path dir = scratch() / "dims_uniform";
    const std::string args = "dims --spec " + spec("uniform.json") + " --q-min -2 --q-max 2 --q-step 1 --out \"" +
                             dir.string() + "\"";
    REQUIRE(run(args) == 0);
    const std::string first = slurp(dir / "separators.csv");
    CHECK(std::regex_search(first, std::regex("^# hsmf [0-9.]+ config=[0-9a-f]{16} seed=0\n")));
    const auto rows = csv_rows(dir / "separators.csv");
    REQUIRE(rows.size() == 6);
    for (std::size_t i = 1; i < rows.size(); ++i) {
        const double q = std::stod(rows[i][0]);
        for (int col = 1; col <= 3; ++col) CHECK(std::stod(rows[i][col]) == doctest::Approx(1.0 - q).epsilon(1e-12));
    }
    const auto diag = nlohmann::json::parse(slurp(dir / "diagnostics.json"));
    CHECK(diag["meta"]["tool"] == "hsmf");
    CHECK(diag["invariants_ok"] == true);

    CHECK(run(args) == 2);  // refuses to overwrite
    REQUIRE(run(args + " --force") == 0);
    CHECK(slurp(dir / "separators.csv") == first);
    CHECK(run("dims --spec " + spec("uniform.json") + " --q-min 2 --q-max -2 --out \"" + dir.string() + "\" --force") ==
          2);
}

TEST_CASE("dims on the periodic and block measures") {
    const fs::path p = scratch() / "dims_periodic";
    REQUIRE(run("dims --spec " + spec("periodic_moran.json") + " --q-min -2 --q-max 2 --q-step 0.5 --k-max 1000 --out \"" +
                p.string() + "\"") == 0);
    for (const auto& row : csv_rows(p / "separators.csv")) {
        if (row[0] == "q") continue;
        const double q = std::stod(row[0]);
        for (int col = 1; col <= 3; ++col) CHECK(std::abs(std::stod(row[col]) - 0.516993 * (1.0 - q)) <= 1e-5);
    }
    const fs::path b = scratch() / "dims_block";
    REQUIRE(run("dims --spec " + spec("block_moran.json") + " --q-min 0 --q-max 1 --q-step 0.5 --out \"" +
                b.string() + "\"") == 0);
    const auto rows = csv_rows(b / "separators.csv");
    CHECK(rows[2][0] == "0.5");
    CHECK(std::stod(rows[2][1]) < std::stod(rows[2][2]));
}

TEST_CASE("spectrum") {
    const fs::path u = scratch() / "spectrum_uniform";
    REQUIRE(run("spectrum --spec " + spec("uniform.json") + " --q-min -2 --q-max 2 --q-step 0.5 --r-octaves 10 --out \"" +
                u.string() + "\"") == 0);
    for (const auto& row : csv_rows(u / "coarse.csv")) {
        if (row[0] == "r") continue;
        const double alpha = std::stod(row[1]);
        if (std::abs(alpha - 1.0) < 0.049) {
            CHECK(row[2] == "1");
        } else if (std::abs(alpha - 1.0) > 0.051) {
            CHECK(row[2] == "empty");
        }
    }
    bool flagged = false;
    for (const auto& row : csv_rows(u / "legendre.csv")) flagged = flagged || row[3] == "1";
    CHECK(flagged);
    const auto tilted = nlohmann::json::parse(slurp(u / "tilted.json"));
    CHECK(tilted["tilted"][0]["alpha_emp_mean"] == 1.0);

    const fs::path b = scratch() / "spectrum_binomial";
    REQUIRE(run("spectrum --spec " + spec("binomial_p025.json") + " --q-min -6 --q-max 6 --q-step 0.1 --r-octaves 16 --out \"" +
                b.string() + "\"") == 0);
    double peak = -1.0;
    double peak_alpha = 0.0;
    for (const auto& row : csv_rows(b / "coarse.csv")) {
        if (row[0] == "r" || row[2] == "empty" || std::stod(row[0]) != std::ldexp(1.0, -16)) continue;
        if (std::stod(row[2]) > peak) {
            peak = std::stod(row[2]);
            peak_alpha = std::stod(row[1]);
        }
    }
    // Largest level set: exponent -tau'(0) = 1.2075, count C(16, 8).
    CHECK(peak == doctest::Approx(std::log2(12870.0) / 16.0).epsilon(1e-12));
    CHECK(std::abs(peak_alpha - 1.2075) <= 0.05);
}

TEST_CASE("moments and sample") {
    const fs::path m = scratch() / "moments";
    REQUIRE(run("moments --spec " + spec("middle_thirds.json") + " --q-min -1 --q-max 2 --q-step 1 --r-octaves 6 --out \"" +
                m.string() + "\"") == 0);
    const auto rows = csv_rows(m / "moments.csv");
    CHECK(rows.front() == std::vector<std::string>{"kind", "q", "r", "value", "flag"});
    CHECK(rows.size() == 1 + 3 * 4 * 6);
    CHECK(run("moments --spec " + spec("middle_thirds.json") + " --kind bogus --out \"" + (m / "x").string() + "\"") == 2);

    const fs::path s = scratch() / "sample";
    REQUIRE(run("sample --spec " + spec("binomial_p025.json") + " --q 1 --count 50 --depth 12 --seed 4 --format json --out \"" +
                s.string() + "\"") == 0);
    const auto j = nlohmann::json::parse(slurp(s / "samples.json"));
    CHECK(j["meta"]["seed"] == 4);
    CHECK(j["rows"].size() == 50);
    CHECK(j["rows"][0][0] == 0);
    const std::string first = slurp(s / "samples.json");
    REQUIRE(run("sample --spec " + spec("binomial_p025.json") + " --q 1 --count 50 --depth 12 --seed 4 --format json --force --out \"" +
                s.string() + "\"") == 0);
    CHECK(slurp(s / "samples.json") == first);
    REQUIRE(run("sample --spec " + spec("binomial_p025.json") + " --q 1 --count 50 --depth 12 --seed 5 --format json --force --out \"" +
                s.string() + "\"") == 0);
    CHECK(slurp(s / "samples.json") != first);
}

TEST_CASE("verify with a missing fixture") {
    CHECK(run("verify --spec \"" + (scratch() / "nowhere").string() + "\" --out \"" + (scratch() / "v").string() + "\"") == 2);
}

}  // TEST_SUITE
