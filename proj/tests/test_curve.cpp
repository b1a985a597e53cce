#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "badflow/curve.hpp"

using namespace badflow;

TEST_CASE("moment curve values and derivative bounds") {
    auto c2 = moment_curve(2);
    CHECK(c2.eval(1.0) == std::vector<double>{1.0, 1.0});
    CHECK(c2.deriv(1.0) == std::vector<double>{1.0, 2.0});
    CHECK(c2.c1 == 1.0);
    CHECK(c2.C1 == 3.0);

    auto c3 = moment_curve(3);
    auto d = c3.deriv(0.5);
    CHECK(d[0] == 1.0);
    CHECK(d[1] == 1.0);
    CHECK(d[2] == 0.75);

    // exact evaluator agrees with double path
    auto ex = c3.exact_eval(bigq(3, 4));
    CHECK(to_double(ex[0]) == 0.75);
    CHECK(to_double(ex[1]) == 0.5625);
}

TEST_CASE("A2 check: moment passes, vanishing derivative fails") {
    CHECK(check_a2(moment_curve(2), 100).pass);
    CHECK(check_a2(moment_curve(2), 100).c1_measured >= 1.0 - 1e-9);
    CHECK(check_a2(moment_curve(3), 1000).pass);

    curve bad;
    bad.n = 2;
    bad.a = -1.0;
    bad.b = 1.0;
    bad.eval = [](double s) { return std::vector<double>{s, s * s}; };
    bad.deriv = [](double s) { return std::vector<double>{1.0, 2.0 * s}; };
    bad.deriv2_bound = 2.0;
    CHECK_FALSE(check_a2(bad, 101).pass); // phi_2'(0) = 0
}

TEST_CASE("Taylor linearization error") {
    auto c2 = moment_curve(2);
    CHECK(taylor_linearization_error(c2, 1.0, 0.0) == 0.0);
    // exact quadratic: |(1.1)^2 - 1 - 0.2| = 0.01
    CHECK(taylor_linearization_error(c2, 1.0, 0.1) == Catch::Approx(0.01).epsilon(1e-10));

    auto c3 = moment_curve(3);
    CHECK(taylor_linearization_error(c3, 1.0, 0.01) <= 0.5 * c3.deriv2_bound * 1e-4);

    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> ux(0.5, 1.5);
    for (int trial = 0; trial < 10000; ++trial) {
        const double x = ux(rng);
        const double h = (1.5 - x) * 0.5 * (static_cast<double>(rng() % 1000) / 1000.0);
        CHECK(taylor_linearization_error(c3, x, h) <= 0.5 * c3.deriv2_bound * h * h + 1e-15);
    }
}

TEST_CASE("affine reparametrization preserves the image") {
    auto c = moment_curve(2);
    curve shifted = c;
    shifted.a = 0.5;
    shifted.b = 2.5; // length 2
    shifted.eval = [](double s) { return std::vector<double>{s, s * s}; };
    shifted.deriv = [](double s) { return std::vector<double>{1.0, 2.0 * s}; };
    auto unit = reparametrize_unit(shifted);
    CHECK(unit.a == 0.0);
    CHECK(unit.b == 1.0);
    for (double u : {0.0, 0.25, 0.5, 0.75, 1.0}) {
        const double s = 0.5 + 2.0 * u;
        CHECK(unit.eval(u) == shifted.eval(s));
    }
    // rescaled derivative bounds
    CHECK(unit.C1 == Catch::Approx(shifted.C1 * 2.0));
    CHECK(unit.deriv2_bound == Catch::Approx(shifted.deriv2_bound * 4.0));
}
