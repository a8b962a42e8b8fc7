#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <sys/wait.h>

#include "renorm/cli.hpp"
#include "renorm/closed_forms.hpp"
#include "renorm/errors.hpp"
#include "renorm/report.hpp"

using namespace renorm;

namespace {

RunConfig command(const std::string& name, const std::string& kind = "torus", double value = std::sqrt(2.0)) {
    RunConfig c;
    c.command = name;
    c.surface = {kind, value};
    return c;
}

nlohmann::json run_json(const RunConfig& c) { return nlohmann::json::parse(execute(c)); }

std::vector<std::string> lines(const std::string& text) {
    std::vector<std::string> out;
    std::istringstream in(text);
    for (std::string l; std::getline(in, l);) out.push_back(l);
    return out;
}

/// Exit status of the command-line binary with the given arguments.
int cli_status(const std::string& args) {
    const std::string cmd = std::string(RENORM_CLI_PATH) + " " + args + " > /dev/null 2>&1";
    const int raw = std::system(cmd.c_str());
    return WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
}

} // namespace

TEST_CASE("number formatting and JSON dump") {
    CHECK(format_number(0.5) == "5.0000000000000000e-01");
    CHECK(format_number(std::nan("")) == "nan");
    CHECK(format_number(-INFINITY) == "-inf");
    const std::string s = dump_json({{"b", 1}, {"a", 0.25}, {"c", std::nan("")}});
    CHECK(s.find("\"a\"") < s.find("\"b\""));
    CHECK(s.find("null") != std::string::npos);
    CHECK(s.back() == '\n');
}

TEST_CASE("energy command: closed form at the Clifford ratio") {
    const nlohmann::json j = run_json(command("energy"));
    CHECK(j.at("value").get<double>() == doctest::Approx(48.9724).epsilon(1e-5));
    CHECK(j.at("R").get<double>() == std::sqrt(2.0));
    CHECK(j.at("config").at("command") == "energy");
    CHECK_FALSE(j.at("config").at("renorm").contains("threads"));
}

TEST_CASE("energy command: numeric sphere and both methods on T_2") {
    RunConfig s = command("energy", "sphere", 1.0);
    s.method = "numeric";
    CHECK(std::abs(run_json(s).at("value").get<double>()) < 1e-6);

    RunConfig t = command("energy", "torus", 2.0);
    t.method = "both";
    const nlohmann::json j = run_json(t);
    CHECK(j.at("closed").at("value").get<double>() == doctest::Approx(52.074).epsilon(1e-4));
    CHECK(j.at("abs_diff").get<double>() <= 0.05);
}

TEST_CASE("config echo round trips") {
    RunConfig c = command("sweep", "torus", 2.0);
    c.from = 1.2;
    c.steps = 7;
    c.renorm.ladderCount = 9;
    c.format = "csv";
    const nlohmann::json j = c;
    const RunConfig back = j.get<RunConfig>();
    CHECK(nlohmann::json(back) == j);
    CHECK(back.steps == 7);
    CHECK(back.renorm.ladderCount == 9);
}

TEST_CASE("potential command writes a CSV table") {
    RunConfig c = command("potential");
    c.format = "csv";
    c.alphas = {0.0, 1.0, -1.0};
    const auto rows = lines(execute(c));
    REQUIRE(rows.size() == 4);
    CHECK(rows[0] == "alpha,closed,numeric,abs_diff");
    auto field = [](const std::string& row, int k) {
        std::istringstream in(row);
        std::string f;
        for (int i = 0; i <= k; ++i) std::getline(in, f, ',');
        return std::stod(f);
    };
    CHECK(field(rows[1], 1) == doctest::Approx(0.21283).epsilon(5e-5));
    CHECK(field(rows[2], 1) == field(rows[3], 1));
    CHECK(field(rows[2], 2) == doctest::Approx(field(rows[3], 2)).epsilon(1e-8));
    for (int i = 1; i <= 3; ++i) CHECK(field(rows[i], 3) < 1e-6);
}

TEST_CASE("minimize and sweep commands") {
    RunConfig m = command("minimize");
    const nlohmann::json j = run_json(m);
    CHECK(std::abs(j.at("R_star").get<double>() - std::sqrt(2.0)) < 1e-8);

    RunConfig s = command("sweep");
    s.from = 1.1;
    s.to = 3.0;
    s.steps = 191;
    const nlohmann::json w = run_json(s);
    CHECK(w.at("rows").size() == 191);
    CHECK(std::abs(w.at("argmin_R").get<double>() - std::sqrt(2.0)) < 0.01);
}

TEST_CASE("fit command on the disk") {
    RunConfig c = command("fit", "disk", 1.0);
    const nlohmann::json j = run_json(c);
    const auto& coeffs = j.at("coefficients");
    CHECK(coeffs.at(0).at("term") == "eps^-2");
    CHECK(coeffs.at(0).at("fitted").get<double>() == doctest::Approx(9.8696).epsilon(5e-3));
    CHECK(coeffs.at(1).at("fitted").get<double>() == doctest::Approx(-12.566).epsilon(5e-3));
}

TEST_CASE("tube command") {
    RunConfig c = command("tube");
    c.tubeEps = {0.5, 0.01};
    const nlohmann::json j = run_json(c);
    REQUIRE(j.at("rows").size() == 2);
    CHECK(j.at("rows").at(0).at("value").get<double>() ==
          doctest::Approx(j.at("rows").at(0).at("display").get<double>()).epsilon(1e-13));
}

TEST_CASE("output is byte-identical across repeats and worker counts") {
    RunConfig c = command("energy", "torus", 2.0);
    c.method = "numeric";
    c.renorm.quad.relTol = 1e-9;
    const std::string a = execute(c);
    CHECK(execute(c) == a);
    c.renorm.threads = 4;
    CHECK(execute(c) == a);
}

TEST_CASE("validation errors") {
    CHECK_THROWS_AS(execute(command("energy", "torus", 0.5)), DomainError);
    CHECK_THROWS_AS(execute(command("energy", "disk", 1.0)), DomainError);
    CHECK_THROWS_AS(execute(command("potential", "sphere", 1.0)), DomainError);
    CHECK_THROWS_AS(execute(command("launch")), DomainError);
    RunConfig f = command("fit", "circle", 1.0);
    CHECK_THROWS_AS(execute(f), DomainError); // circle fits need lambda = -2
}

TEST_CASE("run_command writes to a file and reports exit codes") {
    const auto path = std::filesystem::temp_directory_path() / "renorm_cli_test.json";
    RunConfig c = command("minimize");
    c.outPath = path.string();
    std::ostringstream out, err;
    CHECK(run_command(c, out, err) == 0);
    CHECK(out.str().empty());
    std::ifstream in(path);
    const nlohmann::json j = nlohmann::json::parse(in);
    CHECK(j.contains("E_star"));
    std::filesystem::remove(path);

    std::ostringstream o2, e2;
    CHECK(run_command(command("energy", "torus", 1.0), o2, e2) == 2);
    CHECK(e2.str().find("error") != std::string::npos);
}

TEST_CASE("binary exit codes") {
    CHECK(cli_status("minimize") == 0);
    CHECK(cli_status("energy --torus 0.5") == 2);
    CHECK(cli_status("energy --bogus") == 2);
    CHECK(cli_status("energy --torus 2 --sphere 1") == 2);
    CHECK(cli_status("energy --torus 2 --method numeric --ladder 0.6 0.45 0.3 0.15 0.075") == 3);
    CHECK(cli_status("potential --torus 2 --alpha 0 --format csv") == 0);
}
