#pragma once

/**
 * @file rational.hpp
 * @brief Exact rational arithmetic on arbitrary-precision integers.
 *
 * All combinatorial invariants in this library (Euler numbers, action
 * spectra, systolic ratios) are exact rationals. Values are kept in
 * lowest terms with a positive denominator, so equality is structural.
 */

#include <boost/multiprecision/cpp_int.hpp>

#include <nlohmann/json.hpp>

#include <compare>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace reebkit {

using Int = boost::multiprecision::cpp_int;

inline Int gcd(const Int& a, const Int& b) { return boost::multiprecision::gcd(a, b); }
inline Int lcm(const Int& a, const Int& b) { return boost::multiprecision::lcm(a, b); }
inline Int abs(const Int& a) { return boost::multiprecision::abs(a); }

class Rational {
public:
    Rational() : num_(0), den_(1) {}
    Rational(Int n) : num_(std::move(n)), den_(1) {}
    Rational(int n) : num_(n), den_(1) {}
    Rational(Int n, Int d) : num_(std::move(n)), den_(std::move(d)) { reduce(); }
    Rational(int n, int d) : num_(n), den_(d) { reduce(); }

    const Int& num() const { return num_; }
    const Int& den() const { return den_; }

    bool is_zero() const { return num_ == 0; }
    bool is_negative() const { return num_ < 0; }
    bool is_positive() const { return num_ > 0; }
    bool is_integer() const { return den_ == 1; }

    Rational operator-() const { return Rational(-num_, den_, already_reduced{}); }

    Rational operator+(const Rational& o) const {
        return Rational(num_ * o.den_ + o.num_ * den_, den_ * o.den_);
    }
    Rational operator-(const Rational& o) const {
        return Rational(num_ * o.den_ - o.num_ * den_, den_ * o.den_);
    }
    Rational operator*(const Rational& o) const {
        return Rational(num_ * o.num_, den_ * o.den_);
    }
    Rational operator/(const Rational& o) const {
        if (o.num_ == 0) throw std::domain_error("Rational: division by zero");
        return Rational(num_ * o.den_, den_ * o.num_);
    }

    Rational& operator+=(const Rational& o) { return *this = *this + o; }
    Rational& operator-=(const Rational& o) { return *this = *this - o; }
    Rational& operator*=(const Rational& o) { return *this = *this * o; }
    Rational& operator/=(const Rational& o) { return *this = *this / o; }

    bool operator==(const Rational& o) const { return num_ == o.num_ && den_ == o.den_; }
    std::strong_ordering operator<=>(const Rational& o) const {
        Int lhs = num_ * o.den_, rhs = o.num_ * den_;
        if (lhs < rhs) return std::strong_ordering::less;
        if (lhs > rhs) return std::strong_ordering::greater;
        return std::strong_ordering::equal;
    }

    Rational squared() const { return Rational(num_ * num_, den_ * den_, already_reduced{}); }

    /// floor(*this / o) as an integer; o must be positive.
    Int floor_div(const Rational& o) const {
        if (!o.is_positive()) throw std::domain_error("Rational: floor_div by non-positive");
        Int n = num_ * o.den_;
        Int d = den_ * o.num_;
        Int q = n / d;
        if (n % d != 0 && (n < 0)) --q;
        return q;
    }

    double to_double() const {
        return num_.convert_to<double>() / den_.convert_to<double>();
    }

    /// Renders as "num/den", or "num" when the denominator is 1.
    std::string str() const {
        std::string s = num_.str();
        if (den_ != 1) s += "/" + den_.str();
        return s;
    }

private:
    struct already_reduced {};
    Rational(Int n, Int d, already_reduced) : num_(std::move(n)), den_(std::move(d)) {}

    void reduce() {
        if (den_ == 0) throw std::domain_error("Rational: zero denominator");
        if (den_ < 0) { num_ = -num_; den_ = -den_; }
        if (num_ == 0) { den_ = 1; return; }
        Int g = reebkit::gcd(reebkit::abs(num_), den_);
        num_ /= g;
        den_ /= g;
    }

    Int num_;
    Int den_;  // > 0
};

// JSON form {"num": n, "den": d}; big values fall back to decimal strings.
namespace detail {
inline nlohmann::json int_to_json(const Int& v) {
    if (v >= std::numeric_limits<std::int64_t>::min() &&
        v <= std::numeric_limits<std::int64_t>::max())
        return v.convert_to<std::int64_t>();
    return v.str();
}
inline Int int_from_json(const nlohmann::json& j) {
    if (j.is_string()) return Int(j.get<std::string>());
    return Int(j.get<std::int64_t>());
}
}  // namespace detail

inline void to_json(nlohmann::json& j, const Rational& r) {
    j = nlohmann::json{{"num", detail::int_to_json(r.num())},
                       {"den", detail::int_to_json(r.den())}};
}

inline void from_json(const nlohmann::json& j, Rational& r) {
    r = Rational(detail::int_from_json(j.at("num")), detail::int_from_json(j.at("den")));
}

}  // namespace reebkit
