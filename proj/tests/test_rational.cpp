#include <reebkit/rational.hpp>

#include <catch2/catch_amalgamated.hpp>

#include <random>

using namespace reebkit;

TEST_CASE("rationals reduce to lowest terms with positive denominator") {
    CHECK(Rational(2, 4) == Rational(1, 2));
    CHECK(Rational(-2, 4) == Rational(-1, 2));
    CHECK(Rational(2, -4) == Rational(-1, 2));
    CHECK(Rational(0, 7) == Rational(0));
    CHECK(Rational(-5, -10).num() == 1);
    CHECK(Rational(-5, -10).den() == 2);
    CHECK_THROWS_AS(Rational(1, 0), std::domain_error);
}

TEST_CASE("arithmetic") {
    const Rational a(1, 6), b(1, 10);
    CHECK(a + b == Rational(4, 15));
    CHECK(a - b == Rational(1, 15));
    CHECK(a * b == Rational(1, 60));
    CHECK(a / b == Rational(5, 3));
    CHECK(-a == Rational(-1, 6));
    CHECK(a.squared() == Rational(1, 36));
    CHECK_THROWS_AS(a / Rational(0), std::domain_error);
}

TEST_CASE("ordering is exact") {
    CHECK(Rational(1, 3) < Rational(34, 100));
    CHECK(Rational(-1, 2) < Rational(-1, 3));
    CHECK(Rational(7, 7) == Rational(1));
    CHECK(Rational(10, 3) > Rational(3));
}

TEST_CASE("floor division") {
    CHECK(Rational(7, 2).floor_div(Rational(1)) == 3);
    CHECK(Rational(6).floor_div(Rational(2)) == 3);
    CHECK(Rational(-1, 2).floor_div(Rational(1, 3)) == -2);
    CHECK(Rational(5, 3).floor_div(Rational(5, 3)) == 1);
    CHECK_THROWS_AS(Rational(1).floor_div(Rational(0)), std::domain_error);
    CHECK_THROWS_AS(Rational(1).floor_div(Rational(-1)), std::domain_error);
}

TEST_CASE("field arithmetic fuzz against doubles") {
    std::mt19937 rng(42);
    std::uniform_int_distribution<int> d(-50, 50), pos(1, 50);
    for (int i = 0; i < 500; ++i) {
        const Rational a(d(rng), pos(rng)), b(d(rng), pos(rng));
        CHECK((a + b) - b == a);
        if (!b.is_zero()) CHECK((a / b) * b == a);
        CHECK((a * b).to_double() == Catch::Approx(a.to_double() * b.to_double()).margin(1e-12));
    }
}

TEST_CASE("string rendering") {
    CHECK(Rational(-5, 6).str() == "-5/6");
    CHECK(Rational(7).str() == "7");
    CHECK(Rational(0).str() == "0");
}

TEST_CASE("json round trip, including values past 64 bits") {
    const Rational small(-5, 6);
    nlohmann::json j = small;
    CHECK(j.at("num").get<std::int64_t>() == -5);
    CHECK(j.at("den").get<std::int64_t>() == 6);
    CHECK(j.get<Rational>() == small);

    Int huge = 1;
    for (int i = 0; i < 30; ++i) huge *= 1000003;
    const Rational big(huge, huge + 1);
    nlohmann::json jb = big;
    CHECK(jb.at("num").is_string());
    CHECK(jb.get<Rational>() == big);
}
