// Command-line front-end: exact Seifert invariants and spectra, numeric
// orbit/volume/Calabi computations, and the experiment harness.
//
// Exit codes: 0 success, 1 domain error, 2 usage/parse error, 3 I/O error.
// Stdout carries only the machine-readable payload; diagnostics go to
// stderr. Rationals are rendered as {num,den} in JSON and num/den in CSV.

#include <reebkit/calabi.hpp>
#include <reebkit/harness.hpp>
#include <reebkit/reeb.hpp>
#include <reebkit/seifert.hpp>
#include <reebkit/spectra.hpp>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

namespace {

using namespace reebkit;
using nlohmann::json;

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::vector<SeifertPair> parse_pairs(const std::string& text) {
    std::vector<SeifertPair> pairs;
    std::istringstream in(text);
    std::string chunk;
    while (std::getline(in, chunk, ':')) {
        const auto comma = chunk.find(',');
        if (comma == std::string::npos) throw UsageError("pair '" + chunk + "' lacks a comma");
        try {
            pairs.push_back({Int(chunk.substr(0, comma)), Int(chunk.substr(comma + 1))});
        } catch (const std::exception&) {
            throw UsageError("bad integer in pair '" + chunk + "'");
        }
    }
    if (pairs.empty()) throw UsageError("empty pair list");
    return pairs;
}

void write_payload(const std::string& payload, const std::string& output) {
    if (output.empty()) {
        std::cout << payload;
        return;
    }
    std::ofstream out(output, std::ios::binary);
    out << payload;
    if (!out.good()) throw IoError(output);
}

int thread_cap() {
    const char* env = std::getenv("REEBKIT_THREADS");
    if (!env) return 0;
    const int n = std::atoi(env);
    if (n < 0) throw UsageError("REEBKIT_THREADS must be non-negative");
    return n;
}

int run(int argc, char** argv) {
    CLI::App app{"exact and numerical invariants of periodic Reeb flows"};
    app.require_subcommand(1);
    thread_cap();  // validated; all computations here are sequential

    std::string output;
    app.add_option("--output", output, "write the payload to FILE instead of stdout");
    app.fallthrough();  // let --output appear after the subcommand too

    // seifert
    auto* seifert = app.add_subcommand("seifert", "exact Seifert invariants");
    std::string pairs_text;
    unsigned genus = 0;
    std::size_t orbit_index = 0;
    seifert->add_option("--pairs", pairs_text, "colon-separated a,b pairs, e.g. 2,1:3,1")
        ->required();
    seifert->add_option("--genus", genus, "base genus");
    seifert->add_option("--orbit", orbit_index, "index of the boundary orbit");

    // spectrum
    auto* spectrum = app.add_subcommand("spectrum", "action spectrum table");
    std::vector<int> ellipsoid_pq, spindle_mn;
    int kmax = 1;
    spectrum->add_option("--ellipsoid", ellipsoid_pq, "ellipsoid parameters p q")->expected(2);
    spectrum->add_option("--spindle", spindle_mn, "spindle parameters m n")->expected(2);
    spectrum->add_option("--kmax", kmax, "largest index k")->required();

    // orbit
    auto* orbit = app.add_subcommand("orbit", "periodic-orbit shooting");
    std::vector<int> orbit_pq{2, 3};
    int seed_axis = 1;
    double guess = 1.0, orbit_tol = 1e-10;
    orbit->add_option("--ellipsoid", orbit_pq, "ellipsoid parameters p q")->expected(2);
    orbit->add_option("--seed-axis", seed_axis, "1 or 2: which axis circle to seed");
    orbit->add_option("--guess", guess, "period guess")->required();
    orbit->add_option("--tol", orbit_tol, "residual tolerance");

    // volume
    auto* volume = app.add_subcommand("volume", "contact volume quadrature");
    std::vector<int> vol_pq;
    double disk_rho = 0.0, quad_tol = 1e-8;
    volume->add_option("--ellipsoid", vol_pq, "ellipsoid parameters p q")->expected(2);
    volume->add_option("--disk", disk_rho, "fibered disk model of radius RHO");
    volume->add_option("--quad-tol", quad_tol, "quadrature tolerance");

    // calabi
    auto* cal_cmd = app.add_subcommand("calabi", "Calabi invariant and fixed-point report");
    double cal_eps = 0.0, cal_rho = 1.0, cal_c = 0.5, cal_quad_tol = 1e-9;
    std::optional<unsigned> cal_seed;
    double cal_amplitude = 0.05;
    cal_cmd->add_option("--radial", cal_eps, "radial quadratic Hamiltonian of size EPS");
    cal_cmd->add_option("--random", cal_seed, "random smooth normalized Hamiltonian from SEED");
    cal_cmd->add_option("--amplitude", cal_amplitude, "amplitude for --random");
    cal_cmd->add_option("--rho", cal_rho, "disk radius");
    cal_cmd->add_option("--c", cal_c, "coefficient in a + c a^2");
    cal_cmd->add_option("--quad-tol", cal_quad_tol, "quadrature tolerance");

    // experiment
    auto* experiment = app.add_subcommand("experiment", "run a harness experiment");
    std::string config_path, format = "json";
    experiment->add_option("--config", config_path, "plain-text key = value config")->required();
    experiment->add_option("--format", format, "json or csv");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);
        std::cerr << e.what() << "\n";
        return 2;
    }

    if (seifert->parsed()) {
        SeifertInvariants inv{genus, parse_pairs(pairs_text)};
        json out;
        out["euler"] = euler_number(inv);
        out["k0"] = detail::int_to_json(k0_index(inv));
        out["sos"] = sos_data(inv, orbit_index);
        connectivity_certificate(inv, orbit_index);
        write_payload(out.dump(2) + "\n", output);
        return 0;
    }

    if (spectrum->parsed()) {
        if (ellipsoid_pq.empty() == spindle_mn.empty())
            throw UsageError("choose exactly one of --ellipsoid, --spindle");
        const BesseModel model = !ellipsoid_pq.empty()
                                     ? ellipsoid_model(ellipsoid_pq[0], ellipsoid_pq[1])
                                     : spindle_model(spindle_mn[0], spindle_mn[1]);
        const PeriodMultiset ms = period_multiset(model);
        const Rational vol =
            besse_volume(euler_number(model.invariants), model.common_period);
        std::ostringstream csv;
        csv << "k,tau_k,rho_k\n";
        for (int k = 1; k <= kmax; ++k)
            csv << k << "," << tau_k(ms, k).str() << "," << rho_k(ms, vol, k).str() << "\n";
        write_payload(csv.str(), output);
        return 0;
    }

    if (orbit->parsed()) {
        EllipsoidChart chart(orbit_pq[0], orbit_pq[1]);
        Vec seed = Vec::Zero(4);
        const double pq = seed_axis == 1 ? orbit_pq[0] : orbit_pq[1];
        seed[seed_axis == 1 ? 0 : 2] = std::sqrt(pq / std::numbers::pi);
        const OrbitRecord rec = find_periodic_orbit(chart, seed, guess, orbit_tol);
        json out{{"period", rec.period}, {"residual", rec.residual}};
        write_payload(out.dump(2) + "\n", output);
        return 0;
    }

    if (volume->parsed()) {
        if (vol_pq.empty() == (disk_rho <= 0))
            throw UsageError("choose exactly one of --ellipsoid, --disk");
        double v;
        if (!vol_pq.empty()) {
            v = contact_volume(EllipsoidChart(vol_pq[0], vol_pq[1]), quad_tol);
        } else {
            v = contact_volume(DiskTorusChart(disk_rho), quad_tol);
        }
        json out{{"volume", v}};
        write_payload(out.dump(2) + "\n", output);
        return 0;
    }

    if (cal_cmd->parsed()) {
        HamiltonianSystem sys;
        if (cal_seed) {
            std::mt19937 rng(*cal_seed);
            sys = random_disk_system(cal_rho, cal_amplitude, rng);
        } else if (cal_eps != 0.0) {
            sys = radial_quadratic_system(cal_rho, cal_eps);
        } else {
            throw UsageError("choose one of --radial EPS, --random SEED");
        }
        const CalabiValues cal = calabi(sys, cal_quad_tol);
        json out{{"calabi", cal.via_action},
                 {"calabi_via_hamiltonian", cal.via_hamiltonian},
                 {"normalized_calabi", cal.via_action / sys.surface->area()}};
        try {
            const InequalityReport rep = verify_fixed_point_inequality(sys, cal_c, cal_quad_tol);
            const FixedPointRecord fp = min_action_fixed_point(sys, 1e-9);
            out["fixed_point"] = {fp.point[0], fp.point[1]};
            out["action"] = fp.action;
            out["lhs"] = rep.lhs;
            out["rhs"] = rep.rhs;
            out["pass"] = rep.pass;
        } catch (const SurfaceError& e) {
            out["fixed_point"] = nullptr;
            out["skipped"] = e.what();
        }
        write_payload(out.dump(2) + "\n", output);
        return 0;
    }

    // experiment
    std::ifstream cfg_in(config_path);
    if (!cfg_in) throw IoError(config_path);
    std::stringstream buffer;
    buffer << cfg_in.rdbuf();
    const ExperimentConfig cfg = parse_config(buffer.str());
    ExperimentReport report;
    if (cfg.experiment == "bump")
        report = run_bump_experiment(cfg);
    else if (cfg.experiment == "local_max")
        report = run_local_max_probe(cfg);
    else
        throw ConfigParseError("unknown experiment '" + cfg.experiment + "'");
    const std::string payload =
        format == "csv" ? report_to_csv(report) : report_to_json(report).dump(2) + "\n";
    if (format != "csv" && format != "json") throw UsageError("unknown format " + format);
    write_payload(payload, output);
    return report.all_pass() ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const UsageError& e) {
        std::cerr << e.what() << "\n";
        return 2;
    } catch (const ConfigParseError& e) {
        std::cerr << e.what() << "\n";
        return 2;
    } catch (const IoError& e) {
        std::cerr << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << e.what() << "\n";
        return 1;
    }
}
