#pragma once

/**
 * @file harness.hpp
 * @brief End-to-end experiments and deterministic reporting.
 *
 * Two experiments tie the exact and numerical layers together:
 *  - the bump experiment perturbs a Zoll form by a radial conformal
 *    bump and checks the quadratic volume law, the shortened center
 *    orbit, and the strict increase of rho_k for k above the
 *    stabilization index;
 *  - the local-max probe perturbs an ellipsoid by random small
 *    conformal factors and checks that the observed rho at the
 *    stabilization index never exceeds the unperturbed value.
 *
 * Reports are bit-stable: sorted keys, %.12e floats, fixed seeds.
 */

#include "chart.hpp"
#include "reeb.hpp"
#include "spectra.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <map>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

namespace reebkit {

struct HarnessError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct ConfigParseError : HarnessError {
    explicit ConfigParseError(const std::string& what) : HarnessError("ConfigParseError: " + what) {}
};
struct PredictionFailed : HarnessError {
    explicit PredictionFailed(const std::string& what) : HarnessError("PredictionFailed: " + what) {}
};
struct HypothesisViolated : HarnessError {
    HypothesisViolated() : HarnessError("HypothesisViolated") {}
};
struct IoError : HarnessError {
    explicit IoError(const std::string& path) : HarnessError("IoError: " + path) {}
};
struct AmplitudeNotSmallEnough : HarnessError {
    AmplitudeNotSmallEnough() : HarnessError("NotSmallEnough: amplitude above admissibility bound") {}
};

/// Plain-text key = value configuration.
struct ExperimentConfig {
    std::string experiment;  // "bump" | "local_max"
    std::vector<double> eps_schedule;
    double c_minus = 0.3;
    double c_plus = 0.2;
    double rho = 0.4;
    double ambient_volume = 1.0;  // Zoll ambient, common period 1
    int k = 2;                    // target index for the bump experiment
    int p = 1, q = 2;             // ellipsoid for the probe
    int samples = 20;
    double amplitude = 1e-3;
    double quad_tol = 1e-8;
    unsigned seed = 1;
    std::string raw;  // original text, hashed into the provenance stamp
};

inline ExperimentConfig parse_config(const std::string& text) {
    ExperimentConfig cfg;
    cfg.raw = text;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigParseError("line " + std::to_string(lineno) + ": expected key = value");
        auto trim = [](std::string s) {
            const auto a = s.find_first_not_of(" \t\r");
            const auto b = s.find_last_not_of(" \t\r");
            return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
        };
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        try {
            if (key == "experiment") cfg.experiment = value;
            else if (key == "eps") {
                cfg.eps_schedule.clear();
                std::istringstream vs(value);
                std::string item;
                while (std::getline(vs, item, ',')) cfg.eps_schedule.push_back(std::stod(item));
            } else if (key == "c_minus") cfg.c_minus = std::stod(value);
            else if (key == "c_plus") cfg.c_plus = std::stod(value);
            else if (key == "rho") cfg.rho = std::stod(value);
            else if (key == "ambient_volume") cfg.ambient_volume = std::stod(value);
            else if (key == "k") cfg.k = std::stoi(value);
            else if (key == "p") cfg.p = std::stoi(value);
            else if (key == "q") cfg.q = std::stoi(value);
            else if (key == "samples") cfg.samples = std::stoi(value);
            else if (key == "amplitude") cfg.amplitude = std::stod(value);
            else if (key == "quad_tol") cfg.quad_tol = std::stod(value);
            else if (key == "seed") cfg.seed = unsigned(std::stoul(value));
            else throw ConfigParseError("unknown key '" + key + "'");
        } catch (const ConfigParseError&) {
            throw;
        } catch (const std::exception&) {
            throw ConfigParseError("line " + std::to_string(lineno) + ": bad value for " + key);
        }
    }
    if (cfg.experiment.empty()) throw ConfigParseError("missing 'experiment'");
    return cfg;
}

struct ReportRow {
    std::map<std::string, double> values;
    std::map<std::string, bool> checks;
};

struct ExperimentReport {
    std::string experiment;
    std::string config_hash;
    std::map<std::string, double> tolerances;
    std::vector<ReportRow> rows;

    bool all_pass() const {
        for (const auto& row : rows)
            for (const auto& [name, ok] : row.checks)
                if (!ok) return false;
        return true;
    }
};

namespace detail {

inline std::string fnv1a_hex(const std::string& s) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    char buf[20];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

inline std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.12e", v);
    return buf;
}

}  // namespace detail

/**
 * Bump perturbation of a Zoll ambient with common period 1:
 * lambda_eps = (1 + eps h) lambda_0, h a mean-zero radial bump on a
 * distinguished solid torus. Checks per eps: quadratic volume law,
 * center-orbit period 1 - eps c_-, no stray short orbits on a seed
 * grid, and the direction of the rho_k change.
 */
inline ExperimentReport run_bump_experiment(const ExperimentConfig& cfg) {
    ExperimentReport report;
    report.experiment = "bump";
    report.config_hash = detail::fnv1a_hex(cfg.raw);
    report.tolerances = {{"vol", 1e-6}, {"period", 1e-7}, {"rho_strict", 0.0}};

    const double vol0 = cfg.ambient_volume;
    const int k0 = 1;  // Zoll ambient
    const double domain_radius = 1.25 * cfg.rho;
    if (std::numbers::pi * domain_radius * domain_radius >= vol0)
        throw HarnessError("chart domain does not fit in the ambient volume");

    for (double eps : cfg.eps_schedule) {
        if (eps < 0) throw HarnessError("eps must be non-negative");
        const BumpSpec bump(eps, cfg.c_minus, cfg.c_plus, cfg.rho, vol0);
        const auto chart = bump.chart(domain_radius);
        const double cm = bump.c_minus(), cp = bump.c_plus();
        const double cquad = bump.quadratic_volume_coefficient();

        // Total volume: the chart covers r < domain_radius; outside, the
        // factor is the constant 1 + eps c_+ and the volume scales by its
        // square.
        const double outside = (vol0 - std::numbers::pi * domain_radius * domain_radius) *
                               (1 + eps * cp) * (1 + eps * cp);
        const double vol_measured = outside + contact_volume(*chart, cfg.quad_tol, {cfg.rho});
        const double vol_predicted = vol0 + cquad * eps * eps;

        Vec center(3);
        center << 0.0, 0.0, 0.0;
        const double period_predicted = 1 - eps * cm;
        const OrbitRecord center_orbit =
            find_periodic_orbit(*chart, center, period_predicted, 1e-11, OrbitTag::Short);

        // A regular fiber outside the bump support keeps the constant
        // factor, so its continued period is exactly 1 + eps c_+.
        Vec fiber_seed(3);
        fiber_seed << 1.1 * cfg.rho, 0.0, 0.0;
        const OrbitRecord fiber_orbit =
            find_periodic_orbit(*chart, fiber_seed, 1 + eps * cp, 1e-11, OrbitTag::Continued);

        // Seed grid inside the bump: shooting at one full loop must not
        // converge to anything except the center orbit.
        int stray = 0;
        if (eps > 0) {
            for (double r : {0.3 * cfg.rho, 0.5 * cfg.rho, 0.7 * cfg.rho, 0.9 * cfg.rho}) {
                Vec seed(3);
                seed << r, 0.0, 0.0;
                try {
                    const OrbitRecord orb = find_periodic_orbit(*chart, seed, 1.0, 1e-10);
                    if (orb.anchor.head(2).norm() > 0.05 * cfg.rho &&
                        std::abs(orb.period - (1 + eps * cp)) > 1e-6 &&
                        std::abs(orb.period - (1 - eps * cm)) > 1e-6)
                        ++stray;
                } catch (const DynamicsError&) {
                } catch (const OdeError&) {
                }
            }
        }

        // tau_k of the perturbed form from the measured periods: the
        // center orbit and its iterates, then the regular continuum.
        const double pc = center_orbit.period, po = fiber_orbit.period;
        const double tau_k = std::min(cfg.k * pc, po);
        const double rho_k = tau_k * tau_k / vol_measured;
        const double tau_k_base = 1.0;  // Zoll: tau_k = common period for all k
        const double rho_k_base = tau_k_base * tau_k_base / vol0;
        const double rho_k_lower = (1 + 2 * eps * cp) / (vol0 + cquad * eps * eps);

        ReportRow row;
        row.values = {{"eps", eps},
                      {"c_minus_eff", cm},
                      {"c_plus_eff", cp},
                      {"vol_measured", vol_measured},
                      {"vol_predicted", vol_predicted},
                      {"period_center", pc},
                      {"period_center_predicted", period_predicted},
                      {"period_fiber", po},
                      {"tau_k_obs", tau_k},
                      {"rho_k_obs", rho_k},
                      {"rho_k_base", rho_k_base},
                      {"rho_k_lower_bound", rho_k_lower},
                      {"stray_orbits", double(stray)}};
        row.checks = {{"volume_law", std::abs(vol_measured - vol_predicted) < 1e-6},
                      {"center_period", std::abs(pc - period_predicted) < 1e-7},
                      {"fiber_period", std::abs(po - (1 + eps * cp)) < 1e-7},
                      {"no_stray_orbits", stray == 0},
                      {"mean_zero", bump.mean_certificate() < 1e-12},
                      {"rho_direction", eps == 0 ? std::abs(rho_k - rho_k_base) < 1e-9
                                       : cfg.k > k0
                                           ? rho_k > rho_k_base && rho_k >= rho_k_lower - 1e-9
                                           : rho_k <= rho_k_base}};
        report.rows.push_back(std::move(row));
    }
    return report;
}

namespace detail {

/// Random degree-2 polynomial on the ambient space of an ellipsoid
/// chart, rescaled to unit sup on the surface.
inline ScalarField random_ellipsoid_factor(const EllipsoidChart& ell, std::mt19937& rng) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    struct Term {
        int e[4];
        double c;
    };
    auto terms = std::make_shared<std::vector<Term>>();
    for (int i = 0; i < 4; ++i) terms->push_back({{i == 0, i == 1, i == 2, i == 3}, u(rng)});
    for (int i = 0; i < 4; ++i)
        for (int j = i; j < 4; ++j) {
            Term t{{0, 0, 0, 0}, u(rng)};
            ++t.e[i];
            ++t.e[j];
            terms->push_back(t);
        }
    double sup = 1e-12;
    for (int i = 1; i < 12; ++i)
        for (int j = 0; j < 16; ++j)
            for (int l = 0; l < 16; ++l) {
                Vec x = ell.point(std::numbers::pi / 2 * i / 12, 2 * std::numbers::pi * j / 16,
                                  2 * std::numbers::pi * l / 16);
                double v = 0;
                for (const auto& t : *terms)
                    v += t.c * std::pow(x[0], t.e[0]) * std::pow(x[1], t.e[1]) *
                         std::pow(x[2], t.e[2]) * std::pow(x[3], t.e[3]);
                sup = std::max(sup, std::abs(v));
            }
    for (auto& t : *terms) t.c /= sup;

    ScalarField f;
    f.value = [terms](const Vec& x) {
        double v = 0;
        for (const auto& t : *terms)
            v += t.c * std::pow(x[0], t.e[0]) * std::pow(x[1], t.e[1]) * std::pow(x[2], t.e[2]) *
                 std::pow(x[3], t.e[3]);
        return v;
    };
    f.gradient = [terms](const Vec& x) {
        Vec g = Vec::Zero(4);
        for (const auto& t : *terms)
            for (int d = 0; d < 4; ++d) {
                if (t.e[d] == 0) continue;
                double v = t.c * t.e[d];
                for (int m = 0; m < 4; ++m) {
                    const int e = m == d ? t.e[m] - 1 : t.e[m];
                    v *= std::pow(x[m], e);
                }
                g[d] += v;
            }
        return g;
    };
    return f;
}

/// Closed-form unperturbed orbit through x at time t on E(p,q).
inline Vec ellipsoid_orbit(const Vec& x, double t, int p, int q) {
    Vec y(4);
    const double a1 = 2 * std::numbers::pi * t / p, a2 = 2 * std::numbers::pi * t / q;
    y[0] = std::cos(a1) * x[0] - std::sin(a1) * x[1];
    y[1] = std::sin(a1) * x[0] + std::cos(a1) * x[1];
    y[2] = std::cos(a2) * x[2] - std::sin(a2) * x[3];
    y[3] = std::sin(a2) * x[2] + std::cos(a2) * x[3];
    return y;
}

}  // namespace detail

/**
 * Local-max probe on E(p,q): random small conformal factors; for each,
 * the short orbits are continued and a near-common-period orbit is
 * found by seeding at the minimizer of the factor's orbit averages.
 * The observed tau at the stabilization index is an upper bound, so
 * "observed rho <= unperturbed rho + tol" is conservative.
 */
inline ExperimentReport run_local_max_probe(const ExperimentConfig& cfg) {
    if (cfg.amplitude > 0.01) throw AmplitudeNotSmallEnough();
    ExperimentReport report;
    report.experiment = "local_max";
    report.config_hash = detail::fnv1a_hex(cfg.raw);
    report.tolerances = {{"rho", 1e-5}};

    const int p = cfg.p, q = cfg.q;
    const double big_period = double(p) * q;
    const double rho0 = big_period;  // rho at the stabilization index is p q
    std::mt19937 rng(cfg.seed);

    for (int sample = 0; sample < cfg.samples; ++sample) {
        auto base = std::make_shared<EllipsoidChart>(p, q);
        const ScalarField f = detail::random_ellipsoid_factor(*base, rng);
        const auto chart =
            cfg.amplitude == 0
                ? std::static_pointer_cast<ContactChart>(base)
                : perturb_conformal(base, cfg.amplitude, f);

        const double vol = contact_volume(*chart, 1e-9);

        // Continue the short axis orbits.
        std::vector<double> periods;
        Vec seed1(4);
        seed1 << std::sqrt(p / std::numbers::pi), 0, 0, 0;
        periods.push_back(
            p * find_periodic_orbit(*chart, seed1, double(p), 1e-11, OrbitTag::Continued).period /
            p);
        const double t1 = periods.back();

        // Average the factor over unperturbed orbits on an orbit-space
        // grid; the minimizer seeds a near-common-period orbit.
        double best_avg = std::numeric_limits<double>::infinity();
        Vec best_seed;
        const int nsamp = 64;
        for (int i = 1; i < 24; ++i) {
            const double psi = std::numbers::pi / 2 * i / 24;
            for (int j = 0; j < 32; ++j) {
                Vec x0 = base->point(psi, 0.0, 2 * std::numbers::pi * j / 32);
                double avg = 0;
                for (int m = 0; m < nsamp; ++m)
                    avg += f.value(detail::ellipsoid_orbit(x0, big_period * m / nsamp, p, q));
                avg /= nsamp;
                if (avg < best_avg) {
                    best_avg = avg;
                    best_seed = x0;
                }
            }
        }
        double t_big = std::numeric_limits<double>::infinity();
        try {
            const OrbitRecord orb = find_periodic_orbit(
                *chart, best_seed, big_period * (1 + cfg.amplitude * best_avg), 1e-10,
                OrbitTag::Continued);
            t_big = orb.period;
        } catch (const DynamicsError&) {
        }
        // The other axis orbit is also a candidate (its q/p-th iterate
        // reaches the common period).
        try {
            Vec seed2(4);
            seed2 << 0, 0, std::sqrt(q / std::numbers::pi), 0;
            const OrbitRecord orb =
                find_periodic_orbit(*chart, seed2, double(q), 1e-11, OrbitTag::Continued);
            t_big = std::min(t_big, orb.period * (big_period / q));
        } catch (const DynamicsError&) {
        }

        // Two orbits within tau: the short orbit iterated, or the short
        // orbit plus a near-common-period orbit.
        const double tau_obs = std::min((big_period / p) * t1, std::max(t1, t_big));
        const double rho_obs = tau_obs * tau_obs / vol;

        ReportRow row;
        row.values = {{"sample", double(sample)},
                      {"amplitude", cfg.amplitude},
                      {"vol", vol},
                      {"t_short", t1},
                      {"t_long", t_big},
                      {"tau_obs", tau_obs},
                      {"rho_obs", rho_obs},
                      {"rho_base", rho0}};
        row.checks = {{"local_max", rho_obs <= rho0 + 1e-5}};
        report.rows.push_back(std::move(row));
    }
    return report;
}

struct ChainReport {
    double lhs = 0.0;    // (1 + a)^2 / V
    double rhs = 0.0;    // 1 / V0
    double slack = 0.0;  // rhs - lhs
    bool pass = false;
};

/// From a + a^2/2 <= (V/V0 - 1)/2 conclude (1+a)^2 / V <= 1 / V0.
inline ChainReport inequality_chain_check(double a, double V, double V0) {
    if (V <= 0 || V0 <= 0) throw HarnessError("volumes must be positive");
    if (a + a * a / 2 > (V / V0 - 1) / 2 + 1e-15) throw HypothesisViolated();
    ChainReport rep;
    rep.lhs = (1 + a) * (1 + a) / V;
    rep.rhs = 1 / V0;
    rep.slack = rep.rhs - rep.lhs;
    rep.pass = rep.lhs <= rep.rhs + 1e-12;
    return rep;
}

inline nlohmann::json report_to_json(const ExperimentReport& report) {
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& row : report.rows) {
        nlohmann::json values, checks;
        for (const auto& [key, v] : row.values) values[key] = detail::fmt(v);
        for (const auto& [key, ok] : row.checks) checks[key] = ok;
        rows.push_back({{"values", values}, {"checks", checks}});
    }
    nlohmann::json tol;
    for (const auto& [key, v] : report.tolerances) tol[key] = detail::fmt(v);
    return {{"experiment", report.experiment},
            {"config_hash", report.config_hash},
            {"tolerances", tol},
            {"rows", rows},
            {"all_pass", report.all_pass()}};
}

inline ExperimentReport report_from_json(const nlohmann::json& j) {
    ExperimentReport report;
    report.experiment = j.at("experiment").get<std::string>();
    report.config_hash = j.at("config_hash").get<std::string>();
    for (const auto& [key, v] : j.at("tolerances").items())
        report.tolerances[key] = std::stod(v.get<std::string>());
    for (const auto& rj : j.at("rows")) {
        ReportRow row;
        for (const auto& [key, v] : rj.at("values").items())
            row.values[key] = std::stod(v.get<std::string>());
        for (const auto& [key, v] : rj.at("checks").items()) row.checks[key] = v.get<bool>();
        report.rows.push_back(std::move(row));
    }
    return report;
}

inline std::string report_to_csv(const ExperimentReport& report) {
    std::ostringstream out;
    out << "# experiment=" << report.experiment << " config_hash=" << report.config_hash << "\n";
    std::vector<std::string> vcols, ccols;
    if (!report.rows.empty()) {
        for (const auto& [key, v] : report.rows.front().values) vcols.push_back(key);
        for (const auto& [key, v] : report.rows.front().checks) ccols.push_back(key);
    }
    out << "row";
    for (const auto& c : vcols) out << "," << c;
    for (const auto& c : ccols) out << "," << c;
    out << "\n";
    for (std::size_t i = 0; i < report.rows.size(); ++i) {
        out << i;
        for (const auto& c : vcols) out << "," << detail::fmt(report.rows[i].values.at(c));
        for (const auto& c : ccols) out << "," << (report.rows[i].checks.at(c) ? 1 : 0);
        out << "\n";
    }
    return out.str();
}

inline void emit_report(const ExperimentReport& report, const std::string& path,
                        const std::string& format) {
    std::string payload;
    if (format == "json")
        payload = report_to_json(report).dump(2) + "\n";
    else if (format == "csv")
        payload = report_to_csv(report);
    else
        throw HarnessError("unknown report format: " + format);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError(path);
    out << payload;
    if (!out.good()) throw IoError(path);
}

}  // namespace reebkit
