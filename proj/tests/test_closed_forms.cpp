#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "kohlberg/closed_forms.hpp"

using namespace kohlberg;

TEST_CASE("canonical placements") {
    SECTION("evenly spread singles") {
        auto p = canonical_placement(PlacementKind::opt, 4);
        REQUIRE(p.size() == 4);
        CHECK(p[0] == 0.125);
        CHECK(p[1] == 0.375);
        CHECK(p[2] == 0.625);
        CHECK(p[3] == 0.875);
    }
    SECTION("doubled points, even count") {
        auto p = canonical_placement(PlacementKind::pair, 4);
        REQUIRE(p.size() == 4);
        CHECK(p[0] == 0.25);
        CHECK(p[1] == 0.25);
        CHECK(p[2] == 0.75);
        CHECK(p[3] == 0.75);
    }
    SECTION("odd count leaves the middle point single") {
        auto p3 = canonical_placement(PlacementKind::pair, 3);
        REQUIRE(p3.size() == 3);
        CHECK(p3[0] == 0.25);
        CHECK(p3[1] == 0.25);
        CHECK(p3[2] == 0.75);
        auto p5 = canonical_placement(PlacementKind::pair, 5);
        REQUIRE(p5.size() == 5);
        CHECK_THAT(p5[0], Catch::Matchers::WithinAbs(1.0 / 6.0, 1e-15));
        CHECK_THAT(p5[1], Catch::Matchers::WithinAbs(1.0 / 6.0, 1e-15));
        CHECK(p5[2] == 0.5);
        CHECK_THAT(p5[3], Catch::Matchers::WithinAbs(5.0 / 6.0, 1e-15));
        CHECK_THAT(p5[4], Catch::Matchers::WithinAbs(5.0 / 6.0, 1e-15));
    }
    CHECK_THROWS_AS(canonical_placement(PlacementKind::opt, 0), std::invalid_argument);
}

TEST_CASE("three-facility optimum: frozen values") {
    auto t0 = rho_three(0.0);
    CHECK_THAT(t0.rho, Catch::Matchers::WithinAbs((1.0 + std::sqrt(17.0)) / 4.0, 1e-14));
    CHECK_THAT(t0.s1, Catch::Matchers::WithinAbs((std::sqrt(17.0) - 3.0) / 4.0, 1e-14));
    CHECK_THAT(rho_three(0.25).rho, Catch::Matchers::WithinAbs(1.13520390, 1e-7));
    CHECK_THAT(rho_three(0.5).rho, Catch::Matchers::WithinAbs(1.05562493, 1e-7));
    CHECK_THAT(rho_three(0.75).rho, Catch::Matchers::WithinAbs(1.01359543, 1e-7));
    CHECK_THAT(rho_three(0.9).rho, Catch::Matchers::WithinAbs(1.00219251, 1e-7));
    auto t1 = rho_three(1.0);
    CHECK(t1.rho == 1.0);
    CHECK_THAT(t1.s1, Catch::Matchers::WithinAbs(1.0 / 3.0, 1e-15));
    CHECK_THROWS_AS(rho_three(-0.1), std::invalid_argument);
    CHECK_THROWS_AS(rho_three(1.1), std::invalid_argument);
}

TEST_CASE("three-facility optimum equalizes both deviators' factors") {
    // independent per-facility factor expressions for (s1, 1/2, 1-s1)
    auto rho_outer = [](double a, double s1) {
        return 2.0 * (2.0 + a) * (2.0 + a - 2.0 * a * s1 + a * a * (-1.0 + 2.0 * s1)) /
               ((4.0 + 4.0 * a - 2.0 * a * a) * (1.0 + a + 2.0 * s1 - 2.0 * a * s1));
    };
    auto rho_middle = [](double a, double s1) {
        return (2.0 + a) * (a + 2.0 * s1 - 2.0 * a * s1) /
               ((2.0 + 2.0 * a - a * a) * (1.0 + 2.0 * (-1.0 + a) * s1));
    };
    for (double a = 0.0; a <= 0.951; a += 0.05) {
        auto t = rho_three(a);
        double r1 = rho_outer(a, t.s1);
        double r2 = rho_middle(a, t.s1);
        CHECK_THAT(r1, Catch::Matchers::WithinAbs(r2, 1e-9));
        CHECK_THAT(t.rho, Catch::Matchers::WithinAbs(r1, 1e-9));
    }
}

TEST_CASE("continued fractions match a top-down recursive evaluation") {
    struct Rec {
        double t;
        double operator()(int d) const { return d == 1 ? t : t / (1.0 + (*this)(d - 1)); }
    };
    for (double a = 0.0; a <= 1.0001; a += 0.125) {
        for (int d = 1; d <= 12; ++d) {
            CHECK_THAT(cont_frac(ContFracKind::tilde, d, a),
                       Catch::Matchers::WithinAbs(Rec{-a * a / 4.0}(d), 1e-14));
            CHECK_THAT(cont_frac(ContFracKind::hat, d, a),
                       Catch::Matchers::WithinAbs(Rec{-a / 4.0}(d), 1e-14));
        }
    }
}

TEST_CASE("continued fractions stay in [-1/2, 0] on the model's alpha range") {
    for (double a = 0.0; a <= 1.0001; a += 0.02) {
        for (int d = 1; d <= 40; ++d) {
            for (auto kind : {ContFracKind::tilde, ContFracKind::hat}) {
                double k = cont_frac(kind, d, a);
                CHECK(k <= 0.0);
                CHECK(k >= -0.5 - 1e-12);
            }
        }
    }
}

TEST_CASE("continued fraction reports a vanishing denominator") {
    // t = -1 makes the depth-2 denominator exactly zero
    CHECK_THROWS_AS(cont_frac(ContFracKind::tilde, 2, 2.0), std::domain_error);
    CHECK_THROWS_AS(cont_frac(ContFracKind::tilde, 0, 0.5), std::invalid_argument);
}

TEST_CASE("printed small-n rationals agree with the general forms where marked valid") {
    for (int n = 4; n <= 10; ++n) {
        for (double a = 0.0; a <= 1.0001; a += 0.05) {
            INFO("n=" << n << " alpha=" << a);
            CHECK_THAT(rho_small(PlacementKind::opt, n, a),
                       Catch::Matchers::WithinAbs(rho_general(PlacementKind::opt, n, a), 1e-9));
            if (n % 2 == 0 && rho_small_validates(PlacementKind::pair, n))
                CHECK_THAT(rho_small(PlacementKind::pair, n, a),
                           Catch::Matchers::WithinAbs(rho_general(PlacementKind::pair, n, a),
                                                      1e-9));
        }
    }
}

TEST_CASE("the one corrupt printed form is flagged and visibly wrong") {
    for (int n = 4; n <= 10; ++n) {
        CHECK(rho_small_validates(PlacementKind::opt, n));
        CHECK(rho_small_validates(PlacementKind::pair, n) == (n != 10));
    }
    // the corrupt entry misses even the exact-competition sanity value of 1
    CHECK(std::abs(rho_small(PlacementKind::pair, 10, 1.0) - 1.0) > 0.1);
    CHECK_THROWS_AS(rho_small_validates(PlacementKind::pair, 3), std::invalid_argument);
}

TEST_CASE("general forms: exact endpoints") {
    for (int n = 4; n <= 14; ++n) {
        CHECK_THAT(rho_general(PlacementKind::opt, n, 0.0),
                   Catch::Matchers::WithinAbs(1.5, 1e-12));
        CHECK_THAT(rho_general(PlacementKind::opt, n, 1.0),
                   Catch::Matchers::WithinAbs(1.0, 1e-9));
        if (n % 2 == 0) {
            CHECK_THAT(rho_general(PlacementKind::pair, n, 0.0),
                       Catch::Matchers::WithinAbs(1.0, 1e-12));
            CHECK_THAT(rho_general(PlacementKind::pair, n, 1.0),
                       Catch::Matchers::WithinAbs(1.0, 1e-9));
        }
    }
    CHECK_THROWS_AS(rho_general(PlacementKind::pair, 5, 0.5), std::invalid_argument);
    CHECK_THROWS_AS(rho_general(PlacementKind::opt, 3, 0.5), std::invalid_argument);
}

TEST_CASE("exact spot values") {
    CHECK(rho_small(PlacementKind::pair, 4, 0.5) == 1.0625);
    CHECK_THAT(rho_small(PlacementKind::opt, 4, 0.0), Catch::Matchers::WithinAbs(1.5, 1e-15));
}

TEST_CASE("optimal social cost closed form") {
    CHECK(sc_opt(1, 0.0) == 0.25);
    CHECK_THAT(sc_opt(10, 0.4), Catch::Matchers::WithinAbs((1.0 + 1.2) / 40.0, 1e-15));
    CHECK_THROWS_AS(sc_opt(0, 0.5), std::invalid_argument);
}

TEST_CASE("pair placement quality") {
    auto even0 = quality_pair(8, 0.0);
    CHECK(even0.value == 2.0);
    CHECK(even0.is_exact);
    auto even1 = quality_pair(8, 1.0);
    CHECK(even1.value == 1.0);
    auto odd = quality_pair(5, 0.0);
    CHECK_FALSE(odd.is_exact);
    CHECK_THAT(odd.value, Catch::Matchers::WithinAbs(50.0 / 9.0, 1e-12));
    // the even-n ratio does not depend on n
    CHECK(quality_pair(4, 0.3).value == quality_pair(100, 0.3).value);
    CHECK_THROWS_AS(quality_pair(1, 0.5), std::invalid_argument);
}
