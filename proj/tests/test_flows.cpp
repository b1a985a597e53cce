#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "badflow/exterior.hpp"
#include "badflow/flows.hpp"

using namespace badflow;

namespace {

double frob_diff(const square_matrix& a, const square_matrix& b) {
    double m = 0;
    for (int i = 0; i < a.rows(); ++i)
        for (int j = 0; j < a.cols(); ++j) m = std::max(m, std::abs(a(i, j) - b(i, j)));
    return m;
}

} // namespace

TEST_CASE("weight validation") {
    CHECK_THROWS_AS(weight({0.5, 0.6}), std::invalid_argument);
    CHECK_THROWS_AS(weight({-0.2, 1.2}), std::invalid_argument);
    weight w({1.0 / 3.0, 2.0 / 3.0});
    CHECK_FALSE(w.sorted_positive());
    CHECK(weight({2.0 / 3.0, 1.0 / 3.0}).sorted_positive());
}

TEST_CASE("flow_a: substitution and group law") {
    weight w({0.5, 0.5});
    CHECK(frob_diff(flow_a(w, 0), square_matrix::identity(3)) == 0.0);
    auto m = flow_a(w, std::log(4.0));
    CHECK(m(0, 0) == Catch::Approx(2.0).epsilon(1e-14));
    CHECK(m(1, 1) == Catch::Approx(2.0).epsilon(1e-14));
    CHECK(m(2, 2) == Catch::Approx(0.25).epsilon(1e-14));

    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    for (int trial = 0; trial < 100; ++trial) {
        weight wr({0.7, 0.2, 0.1});
        const double t = u(rng), s = u(rng);
        CHECK(std::abs(determinant(flow_a(wr, t)) - 1.0) < 1e-9);
        CHECK(frob_diff(flow_a(wr, t) * flow_a(wr, s), flow_a(wr, t + s)) < 1e-12 * std::exp(2.2));
    }
}

TEST_CASE("flow_d: dual pattern") {
    weight w({2.0 / 3.0, 1.0 / 3.0});
    CHECK(frob_diff(flow_d(w, 0), square_matrix::identity(3)) == 0.0);
    auto m = flow_d(w, std::log(8.0));
    CHECK(m(0, 0) == Catch::Approx(8.0).epsilon(1e-13));
    CHECK(m(1, 1) == Catch::Approx(0.25).epsilon(1e-13));
    CHECK(m(2, 2) == Catch::Approx(0.5).epsilon(1e-13));
    CHECK(frob_diff(flow_d(w, 1.3) * flow_d(w, -1.3), square_matrix::identity(3)) < 1e-12);
}

TEST_CASE("flow parameters: b, kappa, lambda") {
    weight w({2.0 / 3.0, 1.0 / 3.0});
    flow_params p(w, 100, 2);
    CHECK(p.b == Catch::Approx(std::pow(100.0, 3.0 / 5.0)).epsilon(1e-14));
    CHECK(p.b == Catch::Approx(15.84893).epsilon(1e-6));
    CHECK(std::abs(std::pow(p.b, 1.0 + w[0]) - 100.0) < 1e-10 * 100.0);
    CHECK(p.kappa == Catch::Approx(1e-4).epsilon(1e-12));
    CHECK(p.lambda[0] == 1.0);
    CHECK(p.lambda[1] == Catch::Approx((1.0 + 1.0 / 3.0) / (1.0 + 2.0 / 3.0)).epsilon(1e-14));

    auto g = flow_g(p, w, 0);
    CHECK(frob_diff(g, square_matrix::identity(3)) == 0.0);
    CHECK(flow_g(p, w, 1)(0, 0) == Catch::Approx(p.b).epsilon(1e-14));
    CHECK_THROWS_AS(flow_params(w, 1, 1), std::invalid_argument);
}

TEST_CASE("aux flows: presets and determinant") {
    weight w({0.5, 0.5});
    flow_params p(w, 16, 1);
    CHECK(frob_diff(aux_flow(p, {0.0, 0.0, 0.0}, 1.0), square_matrix::identity(3)) == 0.0);

    const double eta = 1.0 / 400.0; // 1/(100 n^2) at n = 2
    auto ge = aux_flow(p, aux_exponents_g_eta(2, eta), 1.0);
    CHECK(ge(0, 0) == Catch::Approx(p.bpow(-1.0 / 400.0)).epsilon(1e-14));
    CHECK(ge(1, 1) == Catch::Approx(p.bpow(1.0 / 800.0)).epsilon(1e-14));
    CHECK(ge(2, 2) == Catch::Approx(p.bpow(1.0 / 800.0)).epsilon(1e-14));

    weight w3({0.5, 0.3, 0.2});
    flow_params p3(w3, 16, 1);
    for (int n1 = 1; n1 <= 3; ++n1) {
        auto xi = aux_flow(p3, aux_exponents_xi(w3, n1), 0.7);
        CHECK(std::abs(determinant(xi) - 1.0) < 1e-12);
        auto gp = aux_flow(p3, aux_exponents_g_prime(w3, n1), 0.7);
        CHECK(std::abs(determinant(gp) - 1.0) < 1e-12);
        // g'(t) = xi(t) g_r(t)
        CHECK(frob_diff(gp, xi * flow_g(p3, w3, 0.7)) < 1e-12 * p3.bpow(0.7));
    }
    CHECK_THROWS_AS(aux_flow(p, {0.5, 0.0, 0.0}, 1.0), std::invalid_argument);
}

TEST_CASE("unipotents: additivity and shape") {
    CHECK(frob_diff(unipotent_u({0.0, 0.0}), square_matrix::identity(3)) == 0.0);
    CHECK(frob_diff(unipotent_u({3.0, 5.0}) * unipotent_u({-3.0, -5.0}), square_matrix::identity(3)) == 0.0);
    auto u = unipotent_u({3.0, 5.0});
    CHECK(u(0, 1) == 3.0);
    CHECK(u(0, 2) == 5.0);

    CHECK(frob_diff(unipotent_v({0.0, 0.0}), square_matrix::identity(3)) == 0.0);
    auto v = unipotent_v({3.0, 5.0});
    CHECK(v(0, 2) == 3.0);
    CHECK(v(1, 2) == 5.0);
    CHECK(frob_diff(unipotent_v({1.0, 2.0}) * unipotent_v({3.0, 4.0}), unipotent_v({4.0, 6.0})) == 0.0);
}

TEST_CASE("rotation frames: z(k) U(|x| e1) z(k)^-1 = U(x)") {
    CHECK(frob_diff(rotation_frame({1.0, 0.0}), square_matrix::identity(3)) < 1e-15);

    // x = e2 in n = 2: quarter rotation
    auto z = rotation_frame({0.0, 1.0});
    auto conj = z * unipotent_u({1.0, 0.0}) * z.transposed();
    CHECK(frob_diff(conj, unipotent_u({0.0, 1.0})) < 1e-12);

    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    for (int trial = 0; trial < 200; ++trial) {
        const int n = 2 + static_cast<int>(rng() % 3);
        std::vector<double> x(static_cast<std::size_t>(n));
        double nx = 0;
        for (auto& c : x) {
            c = u(rng);
            nx += c * c;
        }
        if (nx < 1e-4) continue;
        auto zf = rotation_frame(x);
        // orthogonality of the SO(n) block
        auto ortho = zf * zf.transposed();
        CHECK(frob_diff(ortho, square_matrix::identity(n + 1)) < 1e-12);
        CHECK(std::abs(determinant(zf) - 1.0) < 1e-10);
        std::vector<double> e1(static_cast<std::size_t>(n), 0.0);
        e1[0] = std::sqrt(nx);
        auto lhs = zf * unipotent_u(e1) * zf.transposed();
        CHECK(frob_diff(lhs, unipotent_u(x)) < 1e-12 * std::max(1.0, std::sqrt(nx)));
    }
    CHECK_THROWS_AS(rotation_frame({0.0, 0.0}), std::invalid_argument);
}

TEST_CASE("flow conjugation of unipotents") {
    weight w({0.5, 0.5});
    flow_params p(w, 16, 1);
    CHECK(conjugate_unipotent_by_flow(p, w, 0.0, {0.3, -0.7}) == std::vector<double>{0.3, -0.7});

    // coefficient matching with the subdivision exponents: y = R^{-q+l} c e_i
    // maps to c R^{l - (1 - lambda_i) q} e_i at t = q
    const int q = 3, l = 1;
    const double R = 16.0;
    for (int i = 0; i < 2; ++i) {
        std::vector<double> y(2, 0.0);
        const double c = 0.37;
        y[static_cast<std::size_t>(i)] = std::pow(R, -q + l) * c;
        auto yy = conjugate_unipotent_by_flow(p, w, q, y);
        const double expect = c * std::pow(R, l - (1.0 - p.lambda[static_cast<std::size_t>(i)]) * q);
        CHECK(yy[static_cast<std::size_t>(i)] == Catch::Approx(expect).epsilon(1e-10));
    }

    // matrix identity g_r(t) U(y) g_r(-t) = U(y')
    std::mt19937_64 rng(13);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int trial = 0; trial < 200; ++trial) {
        weight wr({0.6, 0.4});
        flow_params pr(wr, 8, 1);
        const double t = 3.0 * u(rng);
        std::vector<double> y = {u(rng), u(rng)};
        auto yy = conjugate_unipotent_by_flow(pr, wr, t, y);
        square_matrix gt = flow_g(pr, wr, t), gmt = flow_g(pr, wr, -t);
        auto lhs = gt * unipotent_u(y) * gmt;
        auto rhs = unipotent_u(yy);
        double scale = 0;
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) scale = std::max(scale, std::abs(rhs(i, j)));
        double diff = 0;
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) diff = std::max(diff, std::abs(lhs(i, j) - rhs(i, j)));
        CHECK(diff <= 1e-9 * scale);
    }
}
