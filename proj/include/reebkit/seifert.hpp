#pragma once

/**
 * @file seifert.hpp
 * @brief Exact arithmetic on Seifert invariants of Besse contact 3-manifolds.
 *
 * A Seifert fibration is encoded by a genus and coprime pairs
 * (alpha_j, beta_j). This header computes the Euler number, the
 * stabilization index k0 of the period-counting sequence, canonical
 * Bezout dual pairs, and the combinatorial data of a global surface of
 * section with boundary on a chosen orbit.
 */

#include "rational.hpp"

#include <nlohmann/json.hpp>

#include <cstddef>
#include <stdexcept>
#include <utility>
#include <vector>

namespace reebkit {

struct SeifertError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct NonCoprimePair : SeifertError {
    explicit NonCoprimePair(std::size_t index)
        : SeifertError("NonCoprimePair at index " + std::to_string(index)), index(index) {}
    std::size_t index;
};
struct ZeroAlphaPair : SeifertError {
    explicit ZeroAlphaPair(std::size_t index)
        : SeifertError("ZeroAlphaPair at index " + std::to_string(index)), index(index) {}
    std::size_t index;
};
struct NonCoprimeInput : SeifertError {
    NonCoprimeInput() : SeifertError("NonCoprimeInput") {}
};
struct NonNegativeEulerNumber : SeifertError {
    NonNegativeEulerNumber() : SeifertError("NonNegativeEulerNumber") {}
};
struct NonPositivePeriod : SeifertError {
    NonPositivePeriod() : SeifertError("NonPositivePeriod") {}
};
struct InternalConsistencyFailure : SeifertError {
    explicit InternalConsistencyFailure(const std::string& what)
        : SeifertError("InternalConsistencyFailure: " + what) {}
};

struct SeifertPair {
    Int alpha;  // > 0
    Int beta;   // gcd(alpha, |beta|) = 1
};

struct SeifertInvariants {
    unsigned genus = 0;
    std::vector<SeifertPair> pairs;
};

/// Canonical Bezout partner: alpha*beta' - beta*alpha' = 1 with 0 <= alpha' < alpha.
struct DualPair {
    Int alpha_prime;
    Int beta_prime;
};

/// Surface-of-section combinatorics for a chosen boundary orbit.
struct SosData {
    Int alpha;  // lcm of the remaining multiplicities
    Int beta;
    Int p;
    Int q;
    Int b;   // gcd(p, |q|)
    Int p0;  // p / b > 0
    Int q0;  // q / b, keeps the sign of q
};

inline const SeifertInvariants& validate_invariants(const SeifertInvariants& inv) {
    if (inv.pairs.empty()) throw SeifertError("empty Seifert pair list");
    for (std::size_t j = 0; j < inv.pairs.size(); ++j) {
        const auto& [alpha, beta] = inv.pairs[j];
        if (alpha <= 0) throw ZeroAlphaPair(j);
        if (gcd(alpha, abs(beta)) != 1) throw NonCoprimePair(j);
    }
    return inv;
}

/// e(Y) = -sum_j beta_j / alpha_j.
inline Rational euler_number(const SeifertInvariants& inv) {
    validate_invariants(inv);
    Rational e;
    for (const auto& [alpha, beta] : inv.pairs) e -= Rational(beta, alpha);
    return e;
}

inline DualPair dual_pair(const Int& alpha, const Int& beta) {
    if (alpha <= 0 || gcd(alpha, abs(beta)) != 1) throw NonCoprimeInput();
    if (alpha == 1) return {0, 1};
    // alpha*beta' - beta*alpha' = 1  with  0 <= alpha' < alpha:
    // solve beta * alpha' == -1 (mod alpha) by modular inversion.
    Int b = beta % alpha;
    if (b < 0) b += alpha;
    // Extended Euclid for the inverse of b mod alpha.
    Int r0 = alpha, r1 = b, s0 = 0, s1 = 1;
    while (r1 != 0) {
        Int qt = r0 / r1;
        Int r2 = r0 - qt * r1;
        Int s2 = s0 - qt * s1;
        r0 = r1; r1 = r2;
        s0 = s1; s1 = s2;
    }
    // r0 == 1, so s0 is the inverse of b mod alpha.
    Int ap = (-s0) % alpha;
    if (ap < 0) ap += alpha;
    Int bp = (Int(1) + beta * ap) / alpha;
    if (alpha * bp - beta * ap != 1)
        throw InternalConsistencyFailure("dual_pair determinant");
    return {ap, bp};
}

/// k0 = sum over singular multiplicities of alpha_j, minus their count, plus 1.
inline Int k0_index(const SeifertInvariants& inv) {
    validate_invariants(inv);
    Int k0 = 1;
    for (const auto& [alpha, beta] : inv.pairs)
        if (alpha > 1) k0 += alpha - 1;
    return k0;
}

/// vol(Y, lambda) = -T^2 e for a Besse form with common period T.
inline Rational besse_volume(const Rational& e, const Rational& T) {
    if (!e.is_negative()) throw NonNegativeEulerNumber();
    if (!T.is_positive()) throw NonPositivePeriod();
    return -(T.squared() * e);
}

namespace detail {
/// Reindexes so the chosen pair plays the role of (alpha_1, beta_1);
/// a lone pair is padded with the trivial pair (1,0).
inline std::vector<SeifertPair> reindexed_pairs(const SeifertInvariants& inv,
                                                std::size_t orbit_index) {
    if (orbit_index >= inv.pairs.size())
        throw SeifertError("orbit_index out of range");
    std::vector<SeifertPair> pairs;
    pairs.push_back(inv.pairs[orbit_index]);
    for (std::size_t j = 0; j < inv.pairs.size(); ++j)
        if (j != orbit_index) pairs.push_back(inv.pairs[j]);
    if (pairs.size() == 1) pairs.push_back({1, 0});
    return pairs;
}
}  // namespace detail

inline SosData sos_data(const SeifertInvariants& inv, std::size_t orbit_index) {
    validate_invariants(inv);
    const Rational e = euler_number(inv);
    if (!e.is_negative()) throw NonNegativeEulerNumber();
    const auto pairs = detail::reindexed_pairs(inv, orbit_index);

    SosData d;
    d.alpha = 1;
    for (std::size_t j = 1; j < pairs.size(); ++j) d.alpha = lcm(d.alpha, pairs[j].alpha);
    Rational beta_sum;
    for (std::size_t j = 1; j < pairs.size(); ++j)
        beta_sum += Rational(pairs[j].beta, pairs[j].alpha);
    const Rational beta_exact = beta_sum * Rational(d.alpha);
    if (!beta_exact.is_integer())
        throw InternalConsistencyFailure("beta not integral");
    d.beta = beta_exact.num();

    const Int alpha1 = pairs[0].alpha;
    const Int beta1 = pairs[0].beta;
    const DualPair dual = dual_pair(alpha1, beta1);

    d.p = beta1 * d.alpha + alpha1 * d.beta;
    d.q = -dual.beta_prime * d.alpha - dual.alpha_prime * d.beta;
    if (d.p <= 0) throw InternalConsistencyFailure("p not positive");
    d.b = gcd(d.p, abs(d.q));
    d.p0 = d.p / d.b;
    d.q0 = d.q / d.b;

    // Transversality q0/p0 < -alpha_1'/alpha_1 and the covering-count identity
    // alpha = -b p0 / (e alpha_1); both must hold exactly.
    if (!(Rational(d.q0, d.p0) < Rational(-dual.alpha_prime, alpha1)))
        throw InternalConsistencyFailure("transversality violated");
    if (Rational(d.alpha) * e * Rational(alpha1) != Rational(-d.b * d.p0))
        throw InternalConsistencyFailure("alpha-consistency violated");
    return d;
}

/// Machine check that the glued surface of section is connected:
/// gcd(alpha, beta_2 alpha/alpha_2, ..., beta_k alpha/alpha_k) = 1.
inline void connectivity_certificate(const SeifertInvariants& inv, std::size_t orbit_index) {
    validate_invariants(inv);
    if (!euler_number(inv).is_negative()) throw NonNegativeEulerNumber();
    const auto pairs = detail::reindexed_pairs(inv, orbit_index);
    Int alpha = 1;
    for (std::size_t j = 1; j < pairs.size(); ++j) alpha = lcm(alpha, pairs[j].alpha);
    Int g = alpha;
    for (std::size_t j = 1; j < pairs.size(); ++j)
        g = gcd(g, abs(pairs[j].beta * (alpha / pairs[j].alpha)));
    if (g != 1) throw InternalConsistencyFailure("surface of section not connected");
}

inline void to_json(nlohmann::json& j, const SeifertInvariants& inv) {
    nlohmann::json pairs = nlohmann::json::array();
    for (const auto& [alpha, beta] : inv.pairs)
        pairs.push_back({detail::int_to_json(alpha), detail::int_to_json(beta)});
    j = nlohmann::json{{"genus", inv.genus}, {"pairs", pairs}};
}

inline void from_json(const nlohmann::json& j, SeifertInvariants& inv) {
    inv.genus = j.at("genus").get<unsigned>();
    inv.pairs.clear();
    for (const auto& p : j.at("pairs"))
        inv.pairs.push_back({detail::int_from_json(p.at(0)), detail::int_from_json(p.at(1))});
}

inline void to_json(nlohmann::json& j, const SosData& d) {
    j = nlohmann::json{{"alpha", detail::int_to_json(d.alpha)},
                       {"beta", detail::int_to_json(d.beta)},
                       {"p", detail::int_to_json(d.p)},
                       {"q", detail::int_to_json(d.q)},
                       {"b", detail::int_to_json(d.b)},
                       {"p0", detail::int_to_json(d.p0)},
                       {"q0", detail::int_to_json(d.q0)}};
}

}  // namespace reebkit
