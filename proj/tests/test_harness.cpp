#include <reebkit/harness.hpp>

#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <fstream>
#include <sstream>

using namespace reebkit;
using Catch::Approx;

TEST_CASE("config parsing") {
    const ExperimentConfig cfg = parse_config(
        "# comment\n"
        "experiment = bump\n"
        "eps = 0.01, 0.02\n"
        "c_minus = 0.25\n"
        "seed = 9\n");
    CHECK(cfg.experiment == "bump");
    REQUIRE(cfg.eps_schedule.size() == 2);
    CHECK(cfg.eps_schedule[1] == Approx(0.02));
    CHECK(cfg.c_minus == Approx(0.25));
    CHECK(cfg.seed == 9);

    CHECK_THROWS_AS(parse_config("experiment bump\n"), ConfigParseError);
    CHECK_THROWS_AS(parse_config("experiment = bump\nwhat = 3\n"), ConfigParseError);
    CHECK_THROWS_AS(parse_config("experiment = bump\nrho = banana\n"), ConfigParseError);
    CHECK_THROWS_AS(parse_config("rho = 0.3\n"), ConfigParseError);
}

TEST_CASE("bump profile mean removal") {
    const BumpSpec bump(0.05, 0.3, 0.2, 0.4, 1.0);
    CHECK(bump.mean_certificate() < 1e-12);
    CHECK(bump.chi(0.0) == Approx(-bump.c_minus()));
    CHECK(bump.chi(0.4) == Approx(bump.c_plus()));
    CHECK(bump.chi_prime(0.2) > 0);
    CHECK(bump.quadratic_volume_coefficient() > 0);
    CHECK_THROWS_AS(BumpSpec(0.05, -0.1, 0.2, 0.4, 1.0), ChartError);
    CHECK_THROWS_AS(BumpSpec(0.05, 0.3, 0.2, 0.7, 1.0), ChartError);
}

TEST_CASE("bump experiment") {
    ExperimentConfig cfg = parse_config("experiment = bump\neps = 0, 0.02\n");
    const ExperimentReport report = run_bump_experiment(cfg);
    REQUIRE(report.rows.size() == 2);
    CHECK(report.all_pass());

    const ReportRow& zero = report.rows[0];
    CHECK(zero.values.at("rho_k_obs") == Approx(zero.values.at("rho_k_base")).margin(1e-9));
    CHECK(zero.values.at("period_center") == Approx(1.0));

    const ReportRow& row = report.rows[1];
    CHECK(std::abs(row.values.at("vol_measured") - row.values.at("vol_predicted")) < 1e-6);
    CHECK(row.values.at("period_center") ==
          Approx(row.values.at("period_center_predicted")).margin(1e-7));
    CHECK(row.values.at("rho_k_obs") > row.values.at("rho_k_base"));
    CHECK(row.values.at("stray_orbits") == 0);
}

TEST_CASE("bump experiment below the stabilization index reverses direction") {
    ExperimentConfig cfg = parse_config("experiment = bump\neps = 0.02\nk = 1\n");
    const ExperimentReport report = run_bump_experiment(cfg);
    REQUIRE(report.rows.size() == 1);
    CHECK(report.all_pass());
    CHECK(report.rows[0].values.at("rho_k_obs") < report.rows[0].values.at("rho_k_base"));
}

TEST_CASE("local-max probe") {
    ExperimentConfig cfg =
        parse_config("experiment = local_max\nsamples = 2\namplitude = 1e-3\nseed = 3\n");
    const ExperimentReport report = run_local_max_probe(cfg);
    REQUIRE(report.rows.size() == 2);
    CHECK(report.all_pass());
    for (const auto& row : report.rows)
        CHECK(row.values.at("rho_obs") <= row.values.at("rho_base") + 1e-5);

    cfg.amplitude = 0.5;
    CHECK_THROWS_AS(run_local_max_probe(cfg), AmplitudeNotSmallEnough);
}

TEST_CASE("inequality chain") {
    SECTION("identity case is exact equality") {
        const ChainReport rep = inequality_chain_check(0.0, 2.0, 2.0);
        CHECK(rep.lhs == Approx(rep.rhs));
        CHECK(rep.pass);
    }
    SECTION("saturating inputs give equality of the conclusion") {
        const ChainReport rep = inequality_chain_check(-0.1, 0.81, 1.0);
        CHECK(rep.lhs == Approx(1.0).margin(1e-14));
        CHECK(rep.slack == Approx(0.0).margin(1e-14));
        CHECK(rep.pass);
    }
    SECTION("strict hypothesis gives strict slack") {
        const ChainReport rep = inequality_chain_check(-0.1, 0.9, 1.0);
        CHECK(rep.lhs == Approx(0.9).margin(1e-14));
        CHECK(rep.slack == Approx(0.1).margin(1e-14));
        CHECK(rep.pass);
    }
    SECTION("violated hypothesis is rejected") {
        CHECK_THROWS_AS(inequality_chain_check(0.3, 1.0, 1.0), HypothesisViolated);
        CHECK_THROWS_AS(inequality_chain_check(0.0, -1.0, 1.0), HarnessError);
    }
}

TEST_CASE("report serialization") {
    ExperimentReport report;
    report.experiment = "bump";
    report.config_hash = detail::fnv1a_hex("x");
    report.tolerances = {{"vol", 1e-6}};
    ReportRow row;
    row.values = {{"eps", 0.01}, {"vol_measured", 1.0000123}};
    row.checks = {{"volume_law", true}};
    report.rows.push_back(row);

    SECTION("json round trip") {
        const nlohmann::json j = report_to_json(report);
        const ExperimentReport back = report_from_json(j);
        CHECK(back.experiment == report.experiment);
        CHECK(back.config_hash == report.config_hash);
        REQUIRE(back.rows.size() == 1);
        CHECK(back.rows[0].values.at("eps") == report.rows[0].values.at("eps"));
        CHECK(back.rows[0].checks.at("volume_law"));
        CHECK(back.tolerances.at("vol") == report.tolerances.at("vol"));
    }
    SECTION("csv format") {
        const std::string csv = report_to_csv(report);
        CHECK(csv.find("row,eps,vol_measured,volume_law") != std::string::npos);
        CHECK(csv.find("1.000012300000e+00") != std::string::npos);

        ExperimentReport empty;
        empty.experiment = "bump";
        const std::string header_only = report_to_csv(empty);
        CHECK(header_only.find("row\n") != std::string::npos);
    }
    SECTION("emission is byte-stable and errors on bad paths") {
        const std::string path = "/tmp/reebkit_report_test.json";
        emit_report(report, path, "json");
        std::ifstream in(path);
        std::stringstream a;
        a << in.rdbuf();
        emit_report(report, path, "json");
        std::ifstream in2(path);
        std::stringstream b;
        b << in2.rdbuf();
        CHECK(a.str() == b.str());
        CHECK_FALSE(a.str().empty());
        std::remove(path.c_str());
        CHECK_THROWS_AS(emit_report(report, "/nonexistent/dir/report.json", "json"), IoError);
        CHECK_THROWS_AS(emit_report(report, path, "xml"), HarnessError);
    }
}

TEST_CASE("experiments are deterministic under a fixed seed") {
    ExperimentConfig cfg =
        parse_config("experiment = local_max\nsamples = 1\namplitude = 1e-3\nseed = 12\n");
    const std::string a = report_to_json(run_local_max_probe(cfg)).dump();
    const std::string b = report_to_json(run_local_max_probe(cfg)).dump();
    CHECK(a == b);
}
