#include <catch2/catch_amalgamated.hpp>

#include <nlohmann/json.hpp>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <string>

namespace {

struct RunResult {
    int exit_code;
    std::string out;
};

std::string cli_path() {
    const char* env = std::getenv("REEBKIT_CLI");
    REQUIRE(env != nullptr);
    return env;
}

RunResult run_cli(const std::string& args) {
    const std::string cmd = cli_path() + " " + args + " 2>/dev/null";
    FILE* pipe = popen(cmd.c_str(), "r");
    REQUIRE(pipe != nullptr);
    std::string out;
    char buf[512];
    while (std::size_t n = std::fread(buf, 1, sizeof buf, pipe)) out.append(buf, n);
    const int status = pclose(pipe);
    return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, out};
}

std::string write_temp(const std::string& name, const std::string& text) {
    const std::string path = "/tmp/" + name;
    std::ofstream out(path);
    out << text;
    return path;
}

}  // namespace

TEST_CASE("cli seifert") {
    const RunResult r = run_cli("seifert --pairs 2,1:3,1 --orbit 0");
    REQUIRE(r.exit_code == 0);
    const nlohmann::json j = nlohmann::json::parse(r.out);
    CHECK(j["euler"]["num"] == -5);
    CHECK(j["euler"]["den"] == 6);
    CHECK(j["k0"] == 4);
    CHECK(j["sos"]["p0"] == 5);
    CHECK(j["sos"]["q0"] == -4);

    CHECK(run_cli("seifert --pairs 1,0").exit_code == 1);
    CHECK(run_cli("seifert --pairs 4,2").exit_code == 1);
    CHECK(run_cli("seifert --pairs 2,1x3,1").exit_code == 2);
}

TEST_CASE("cli spectrum") {
    const RunResult r = run_cli("spectrum --ellipsoid 2 3 --kmax 4");
    REQUIRE(r.exit_code == 0);
    CHECK(r.out == "k,tau_k,rho_k\n1,2,2/3\n2,3,3/2\n3,4,8/3\n4,6,6\n");

    const RunResult round = run_cli("spectrum --ellipsoid 1 1 --kmax 3");
    REQUIRE(round.exit_code == 0);
    CHECK(round.out == "k,tau_k,rho_k\n1,1,1\n2,1,1\n3,1,1\n");

    const RunResult spindle = run_cli("spectrum --spindle 1 2 --kmax 5");
    REQUIRE(spindle.exit_code == 0);
    CHECK(spindle.out.rfind("k,tau_k,rho_k\n", 0) == 0);
    CHECK(spindle.out.find("\n5,3,") != std::string::npos);

    CHECK(run_cli("spectrum --ellipsoid 2 3 --spindle 1 2 --kmax 2").exit_code == 2);
    CHECK(run_cli("spectrum --kmax 2").exit_code == 2);
    CHECK(run_cli("spectrum --ellipsoid 2 3").exit_code == 2);
}

TEST_CASE("cli orbit and volume") {
    const RunResult orbit = run_cli("orbit --ellipsoid 2 3 --seed-axis 1 --guess 2.1");
    REQUIRE(orbit.exit_code == 0);
    const nlohmann::json oj = nlohmann::json::parse(orbit.out);
    CHECK(std::abs(oj["period"].get<double>() - 2.0) < 1e-9);
    CHECK(oj["residual"].get<double>() < 1e-10);

    const RunResult vol = run_cli("volume --disk 1.0");
    REQUIRE(vol.exit_code == 0);
    const nlohmann::json vj = nlohmann::json::parse(vol.out);
    CHECK(std::abs(vj["volume"].get<double>() - 3.14159265358979) < 1e-6);

    CHECK(run_cli("volume --disk 1.0 --ellipsoid 1 1").exit_code == 2);
}

TEST_CASE("cli calabi") {
    const RunResult r = run_cli("calabi --radial 0.05 --c 0.5");
    REQUIRE(r.exit_code == 0);
    const nlohmann::json j = nlohmann::json::parse(r.out);
    CHECK(std::abs(j["calabi"].get<double>() - (-0.0125)) < 1e-7);
    CHECK(j["pass"].get<bool>());
    CHECK(std::abs(j["action"].get<double>() - (-0.025)) < 1e-7);

    CHECK(run_cli("calabi").exit_code == 2);
}

TEST_CASE("cli experiment") {
    const std::string good =
        write_temp("reebkit_cli_bump.cfg", "experiment = bump\neps = 0, 0.02\n");
    const RunResult r = run_cli("experiment --config " + good);
    CHECK(r.exit_code == 0);
    const nlohmann::json j = nlohmann::json::parse(r.out);
    CHECK(j["all_pass"].get<bool>());
    CHECK(j["rows"].size() == 2);

    const RunResult csv = run_cli("experiment --config " + good + " --format csv");
    CHECK(csv.exit_code == 0);
    CHECK(csv.out.find("# experiment=bump") == 0);

    const std::string bad = write_temp("reebkit_cli_bad.cfg", "experiment = bump\nwhat = 1\n");
    CHECK(run_cli("experiment --config " + bad).exit_code == 2);
    CHECK(run_cli("experiment --config /nonexistent.cfg").exit_code == 3);
    std::remove(good.c_str());
    std::remove(bad.c_str());
}

TEST_CASE("cli misc") {
    CHECK(run_cli("--no-such-flag").exit_code == 2);
    CHECK(run_cli("").exit_code == 2);

    const RunResult a = run_cli("spectrum --ellipsoid 3 5 --kmax 9");
    const RunResult b = run_cli("spectrum --ellipsoid 3 5 --kmax 9");
    CHECK(a.out == b.out);

    const std::string path = "/tmp/reebkit_cli_out.csv";
    const RunResult f = run_cli("spectrum --ellipsoid 2 3 --kmax 2 --output " + path);
    REQUIRE(f.exit_code == 0);
    CHECK(f.out.empty());
    std::ifstream in(path);
    std::string line;
    std::getline(in, line);
    CHECK(line == "k,tau_k,rho_k");
    std::remove(path.c_str());
}
