#pragma once

/**
 * @file spectra.hpp
 * @brief Action spectra, tau_k and rho_k for Besse models.
 *
 * A Besse flow has a continuum of orbits of common minimal period T and
 * finitely many singular orbits of period T/alpha_j. The multiset of
 * minimal periods (with orbit counts) determines tau_k exactly, and
 * rho_k = tau_k^2 / vol.
 */

#include "rational.hpp"
#include "seifert.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <map>
#include <optional>
#include <stdexcept>
#include <vector>

namespace reebkit {

struct SpectrumError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct Unbounded : SpectrumError {
    Unbounded() : SpectrumError("Unbounded: counting function never reaches k") {}
};
struct NonPositiveVolume : SpectrumError {
    NonPositiveVolume() : SpectrumError("NonPositiveVolume") {}
};
struct NonCoprime : SpectrumError {
    NonCoprime() : SpectrumError("NonCoprime") {}
};
struct Unordered : SpectrumError {
    Unordered() : SpectrumError("Unordered: requires p <= q") {}
};
struct SmoothSphereCase : SpectrumError {
    SmoothSphereCase() : SpectrumError("SmoothSphereCase: requires m + n > 2") {}
};

/// Orbit count of a period entry; the regular continuum is INFINITE.
struct OrbitCount {
    static OrbitCount infinite() { return {true, 0}; }
    static OrbitCount finite(Int n) { return {false, std::move(n)}; }
    bool is_infinite = false;
    Int value = 0;  // meaningful only when finite
};

struct PeriodEntry {
    Rational minimal_period;  // > 0
    OrbitCount count;
};

/// Sorted minimal-period entries; at most one INFINITE entry.
using PeriodMultiset = std::vector<PeriodEntry>;

struct BesseModel {
    SeifertInvariants invariants;
    Rational common_period;  // T > 0
};

inline PeriodMultiset period_multiset(const BesseModel& model) {
    validate_invariants(model.invariants);
    if (!euler_number(model.invariants).is_negative()) throw NonNegativeEulerNumber();
    if (!model.common_period.is_positive()) throw NonPositivePeriod();

    std::map<Rational, Int> singular;  // minimal period -> orbit count
    for (const auto& [alpha, beta] : model.invariants.pairs)
        if (alpha > 1) singular[model.common_period / Rational(alpha)] += 1;

    PeriodMultiset ms;
    for (const auto& [period, count] : singular)
        ms.push_back({period, OrbitCount::finite(count)});
    ms.push_back({model.common_period, OrbitCount::infinite()});
    return ms;
}

namespace detail {
/// Number of closed orbits (iterates included) of period <= tau.
/// Returns nullopt to signal infinity.
inline std::optional<Int> orbit_count_up_to(const PeriodMultiset& ms, const Rational& tau) {
    Int total = 0;
    for (const auto& e : ms) {
        if (e.count.is_infinite) {
            if (tau >= e.minimal_period) return std::nullopt;
        } else {
            total += e.count.value * tau.floor_div(e.minimal_period);
        }
    }
    return total;
}
}  // namespace detail

/// tau_k = inf { tau : at least k closed orbits have period <= tau }.
/// The infimum is attained on the grid of iterate periods m * T_entry.
inline Rational tau_k(const PeriodMultiset& ms, const Int& k) {
    if (ms.empty()) throw SpectrumError("empty period multiset");
    if (k <= 0) throw SpectrumError("k must be positive");

    std::vector<Rational> candidates;
    for (const auto& e : ms) {
        if (e.count.is_infinite) {
            candidates.push_back(e.minimal_period);
        } else {
            for (Int m = 1; m <= k; ++m)
                candidates.push_back(e.minimal_period * Rational(m));
        }
    }
    std::sort(candidates.begin(), candidates.end());
    for (const auto& tau : candidates) {
        auto n = detail::orbit_count_up_to(ms, tau);
        if (!n || *n >= k) return tau;
    }
    throw Unbounded();
}

inline Rational rho_k(const PeriodMultiset& ms, const Rational& volume, const Int& k) {
    if (!volume.is_positive()) throw NonPositiveVolume();
    return tau_k(ms, k).squared() / volume;
}

/// Boundary of the solid ellipsoid E(p,q): common period pq, a singular
/// orbit for each of p, q exceeding 1, Euler number -1/(pq).
inline BesseModel ellipsoid_model(const Int& p, const Int& q) {
    if (p <= 0 || q <= 0 || gcd(p, q) != 1) throw NonCoprime();
    if (p > q) throw Unordered();
    // Seifert pairs (q, b1), (p, b2) with b1 p + b2 q = 1, canonical 0 <= b1 < q.
    Int b1 = 0, b2 = 0;
    for (Int c = 0; c < q; ++c) {
        Int rem = Int(1) - c * p;
        if (rem % q == 0) { b1 = c; b2 = rem / q; break; }
    }
    BesseModel model;
    model.invariants.pairs = {{q, b1}, {p, b2}};
    model.common_period = Rational(p * q);
    if (euler_number(model.invariants) != Rational(-1, p * q))
        throw InternalConsistencyFailure("ellipsoid Euler number");
    return model;
}

/// Besse spindle orbifold S^2(m,n) geodesic flow seen on L(m+n,1),
/// equator period normalized to 1; the common period is
/// a = m+n (odd case) or (m+n)/2 (even case).
inline BesseModel spindle_model(const Int& m, const Int& n) {
    if (m <= 0 || n <= 0) throw SpectrumError("m, n must be positive");
    if (m + n <= 2) throw SmoothSphereCase();
    Int a = m + n;
    if (a % 2 == 0) a /= 2;
    BesseModel model;
    model.invariants.pairs = {{a, 1}, {a, 1}};
    model.common_period = Rational(a);
    return model;
}

/// All coprime (p,q), p <= q, with p + q - 1 = k, sorted lexicographically.
inline std::vector<std::pair<Int, Int>> diophantine_maximizers(const Int& k) {
    std::vector<std::pair<Int, Int>> out;
    for (Int p = 1; 2 * p <= k + 1; ++p) {
        Int q = k + 1 - p;
        if (gcd(p, q) == 1) out.emplace_back(p, q);
    }
    return out;
}

inline void to_json(nlohmann::json& j, const PeriodMultiset& ms) {
    j = nlohmann::json::array();
    for (const auto& e : ms) {
        nlohmann::json count;
        if (e.count.is_infinite)
            count = "inf";
        else
            count = detail::int_to_json(e.count.value);
        j.push_back({{"period", e.minimal_period}, {"count", count}});
    }
}

inline void from_json(const nlohmann::json& j, PeriodMultiset& ms) {
    ms.clear();
    for (const auto& e : j) {
        PeriodEntry entry;
        entry.minimal_period = e.at("period").get<Rational>();
        if (e.at("count").is_string())
            entry.count = OrbitCount::infinite();
        else
            entry.count = OrbitCount::finite(detail::int_from_json(e.at("count")));
        ms.push_back(entry);
    }
}

}  // namespace reebkit
