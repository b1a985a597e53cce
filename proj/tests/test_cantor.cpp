#include <catch2/catch_amalgamated.hpp>

#include <random>
#include <sstream>

#include "badflow/cantor.hpp"
#include "badflow/diophantine.hpp"
#include "support/cantor_oracles.hpp"

using namespace badflow;

namespace {

construction_config frozen_config(int depth = 3, int workers = 1) {
    construction_config cfg(weight({0.5, 0.5}), moment_curve(2), 16, 1);
    cfg.depth = depth;
    cfg.workers = workers;
    return cfg;
}

std::string serialize_tree(const construction_result& res) {
    std::ostringstream os;
    os.precision(17);
    for (const auto& gen : res.generations)
        for (const auto& nd : gen) {
            os << nd.iv.lo << "," << nd.iv.hi << "," << nd.level << "," << nd.parent << ","
               << static_cast<int>(nd.status) << "," << static_cast<int>(nd.cls.kind) << ","
               << nd.cls.i << "," << nd.cls.l << "," << nd.cls.p << ";";
            for (auto v : nd.witness) os << v << " ";
            os << "|";
        }
    return os.str();
}

} // namespace

TEST_CASE("par_R subdivision") {
    auto halves = par_r({0.0, 1.0}, 2);
    REQUIRE(halves.size() == 2);
    CHECK(halves[0].lo == 0.0);
    CHECK(halves[0].hi == 0.5);
    CHECK(halves[1].lo == 0.5);
    CHECK(halves[1].hi == 1.0);

    auto quarters = par_r({0.0, 1.0}, 4);
    REQUIRE(quarters.size() == 4);
    for (int k = 0; k < 4; ++k) {
        CHECK(quarters[static_cast<std::size_t>(k)].lo == Catch::Approx(0.25 * k));
        CHECK(quarters[static_cast<std::size_t>(k)].hi == Catch::Approx(0.25 * (k + 1)));
    }

    // nesting: two rounds of par_R give R^2 intervals of length R^-2
    std::vector<interval_t> nested;
    for (const auto& iv : par_r({0.0, 1.0}, 4))
        for (const auto& sub : par_r(iv, 4)) nested.push_back(sub);
    CHECK(nested.size() == 16);
    for (const auto& iv : nested) CHECK(iv.len() == Catch::Approx(1.0 / 16.0));

    CHECK_THROWS_AS(par_r({0.0, 1.0}, 1), std::invalid_argument);
}

TEST_CASE("certified_max_norm: trivial column, diagonal case, enclosure soundness") {
    auto cfg = frozen_config();

    // q = 0, a = e_0: g_r(0) U(phi(s)) e_0 = e_0, norm 1
    auto e = certified_max_norm(cfg, {1, 0, 0}, 0, {0.6, 0.7});
    CHECK(e.lo == Catch::Approx(1.0));
    CHECK(e.certified);

    // a = (0,0,1) at q = 1: components (b s^2, 0, b^{-1/2}); max at the right
    // endpoint of [0.5, 0.6]
    auto e2 = certified_max_norm(cfg, {0, 0, 1}, 1, {0.5, 0.6});
    const double truth = std::max(cfg.fp.bpow(1) * 0.36, cfg.fp.bpow(-0.5));
    CHECK(e2.lo <= truth * (1 + 1e-12));
    CHECK(e2.hi >= truth * (1 - 1e-12));
    CHECK(e2.certified);

    // refining the grid keeps the true max inside the previous enclosure
    construction_config fine = cfg;
    fine.cert_grid = 330;
    auto e3 = certified_max_norm(fine, {0, 0, 1}, 1, {0.5, 0.6});
    CHECK(e3.lo >= e2.lo - 1e-15);
    CHECK(e3.hi <= e2.hi + 1e-15);

    CHECK_THROWS_AS(certified_max_norm(cfg, {0, 0, 0}, 1, {0.5, 0.6}), std::invalid_argument);
}

TEST_CASE("survival: early generations are fully alive at kappa = 1/16") {
    auto cfg = frozen_config();
    // q = 1, 2: the coefficient box is empty, so every interval survives
    for (int q : {1, 2}) {
        const double len = std::pow(16.0, -q);
        for (double lo : {0.5, 0.75, 1.0, 1.49}) {
            auto s = survival_test(cfg, {lo, lo + len}, q);
            CHECK(s.status == node_status::alive);
        }
    }
}

TEST_CASE("survival vs brute-force scan at q = 3") {
    auto cfg = frozen_config();
    const int q = 3;
    const double len = std::pow(16.0, -q);
    const double theta = cfg.fp.kappa * cfg.fp.bpow(-q);
    // sweep all 4096 level-3 intervals; compare against a 400-point grid scan
    int dead = 0, oracle_dead = 0;
    for (int j = 0; j < 4096; ++j) {
        interval_t node{0.5 + j * len, 0.5 + (j + 1) * len};
        auto s = survival_test(cfg, node, q);
        const double gmin = naive::grid_min_norm(cfg, node, q, 1, 3, 400);
        if (s.status == node_status::dead) ++dead;
        if (gmin <= cfg.fp.kappa) ++oracle_dead;
        // any grid hit must kill; certain-death must be visible to the grid
        if (gmin <= cfg.fp.kappa * (1 - 1e-9)) CHECK(s.status == node_status::dead);
        if (s.status == node_status::dead) {
            CHECK(s.witness_min_hi <= theta * (1 + 0.02));
            // the witness really achieves a small norm somewhere on a fine grid
            double wmin = std::numeric_limits<double>::infinity();
            for (int g = 0; g <= 400; ++g)
                wmin = std::min(wmin, naive::norm_at(cfg, s.witness, q, node.lo + node.len() * g / 400));
            CHECK(wmin <= cfg.fp.kappa * 1.05);
        }
    }
    CHECK(dead > 0);
    CHECK(dead >= oracle_dead);
    CHECK(dead <= oracle_dead + 8); // conservative kills only at enclosure ties
}

TEST_CASE("build_sequence: frozen configuration at depth 3") {
    auto cfg = frozen_config(3);
    auto res = build_sequence(cfg);
    REQUIRE(res.generations.size() == 4);
    CHECK(res.generations[1].size() == 16);
    CHECK(res.generations[2].size() == 256);
    CHECK(res.generations[3].size() == 4096);

    std::int64_t survivors = 0, dead = 0, unclassified = 0;
    for (const auto& nd : res.generations[3]) {
        if (nd.status == node_status::alive) ++survivors;
        if (nd.status == node_status::dead) {
            ++dead;
            CHECK(nd.cls.kind != bucket_kind::none); // exactly one bucket assigned
            if (nd.cls.kind == bucket_kind::unclassified) ++unclassified;
            CHECK(!nd.witness.empty());
        }
    }
    CHECK(survivors > 0);
    CHECK(dead > 0);
    CHECK(unclassified == 0);

    // survivor midpoints pass the independent K_kappa recheck for all q <= 3
    int checked = 0;
    for (const auto& nd : res.generations[3]) {
        if (nd.status != node_status::alive) continue;
        if (++checked > 64) break; // spot-check a deterministic prefix
        for (int q = 0; q <= 3; ++q) {
            auto l = cdetail::midpoint_lattice(cfg, nd.iv.mid(), q);
            CHECK(in_k_eps(l, cfg.fp.kappa * (1 - 0.02)));
        }
    }

    // dead nodes near s = 1 carry grade-1 witnesses and classify as
    // extremely dangerous (the l-range is empty at this scale)
    bool saw_ed = false;
    for (const auto& nd : res.generations[3]) {
        if (nd.status == node_status::dead && std::abs(nd.iv.mid() - 1.0) < 2 * nd.iv.len()) {
            CHECK(nd.cls.kind == bucket_kind::extremely_dangerous);
            CHECK(nd.cls.i == 1);
            saw_ed = true;
        }
    }
    CHECK(saw_ed);
}

TEST_CASE("build_sequence is deterministic across worker counts") {
    auto r1 = build_sequence(frozen_config(3, 1));
    auto r8 = build_sequence(frozen_config(3, 8));
    CHECK(serialize_tree(r1) == serialize_tree(r8));
}

TEST_CASE("F-counts and d_q on a hand-built tree") {
    // root [0,1], R = 4; generation 1: nodes 0,3 dead in bucket 0
    construction_result res;
    res.generations.emplace_back();
    res.generations[0].push_back({{0.0, 1.0}, 0, -1, node_status::alive, false, {}, 0, {}, {}});
    res.generations.emplace_back();
    for (int k = 0; k < 4; ++k) {
        interval_node nd;
        nd.iv = {0.25 * k, 0.25 * (k + 1)};
        nd.level = 1;
        nd.parent = 0;
        nd.status = (k == 0 || k == 3) ? node_status::dead : node_status::alive;
        nd.cls.kind = bucket_kind::generic;
        nd.cls.p = 0;
        res.generations[1].push_back(std::move(nd));
    }
    CHECK(f_count(res, 1, 0, 0) == 2);
    CHECK(d_q_upper(res, 1, 4) == Catch::Approx(2.0)); // (4/R)^1 * 2 with R = 4
    CHECK(d_q_exact_min(res, 1, 4) == Catch::Approx(2.0)); // only bucket 0 exists at q = 1

    // empty bucket
    CHECK(f_count(res, 1, 0, 0) == 2);

    // fully dead generation: F <= R and d_1 = (4/R) * R = 4
    for (auto& nd : res.generations[1]) {
        nd.status = node_status::dead;
        nd.cls.kind = bucket_kind::generic;
        nd.cls.p = 0;
    }
    CHECK(f_count(res, 1, 0, 0) == 4);
    CHECK(d_q_upper(res, 1, 4) == Catch::Approx(4.0));
}

TEST_CASE("d_q drops when m increases") {
    auto c1 = frozen_config(3);
    auto r1 = build_sequence(c1, false);
    construction_config c2(weight({0.5, 0.5}), moment_curve(2), 16, 2);
    c2.depth = 3;
    auto r2 = build_sequence(c2, false);
    CHECK(r1.d_sequence_upper > 0.0);
    CHECK(r2.d_sequence_upper < r1.d_sequence_upper);
}

TEST_CASE("detect_dangerous equals the naive scan") {
    // the acceptance configuration: R = 4, q = 2, l = 1, rho = 0.5
    construction_config cfg(weight({0.5, 0.5}), moment_curve(2), 4, 1);
    cfg.rho = 0.5;
    cfg.dangerous_grid = 2000;
    const interval_t region{0.5, 1.5};
    auto got = detect_dangerous(cfg, 2, 1, region);
    auto want = naive::dangerous_scan(cfg, 2, 1, region);
    REQUIRE(got.size() == want.size());
    for (std::size_t i = 0; i < got.size(); ++i) {
        CHECK(got[i].witness == want[i].witness);
        CHECK(got[i].lo == want[i].lo);
        CHECK(got[i].hi == want[i].hi);
        CHECK(got[i].peak == want[i].peak);
    }

    // a configuration with nonempty records: q = 4 keeps the box rich enough
    auto got4 = detect_dangerous(cfg, 4, 1, region);
    auto want4 = naive::dangerous_scan(cfg, 4, 1, region);
    REQUIRE(!got4.size() == false);
    REQUIRE(got4.size() == want4.size());
    for (std::size_t i = 0; i < got4.size(); ++i) {
        CHECK(got4[i].witness == want4[i].witness);
        CHECK(got4[i].lo == want4[i].lo);
        CHECK(got4[i].hi == want4[i].hi);
        CHECK(got4[i].peak == want4[i].peak);
    }
    // peaks live in [rho/2, rho]; records with the same witness are disjoint
    for (std::size_t i = 0; i < got4.size(); ++i) {
        CHECK(got4[i].peak >= cfg.rho / 2);
        CHECK(got4[i].peak <= cfg.rho);
        for (std::size_t j = i + 1; j < got4.size(); ++j)
            if (got4[i].witness == got4[j].witness)
                CHECK((got4[i].hi < got4[j].lo || got4[j].hi < got4[i].lo));
    }
}

TEST_CASE("eq_membership: empty box, zero exclusion, full-box agreement") {
    auto cfg = frozen_config();
    // q = 1: |a_i| < rho b^{r_i} = 0.63 forces a = 0, so no membership
    CHECK_FALSE(eq_membership(cfg, 1.0, 1).member);

    construction_config small(weight({0.5, 0.5}), moment_curve(2), 4, 1);
    small.rho = 0.5;
    const int q = 3;
    // direct full-box evaluation at s = 1
    auto direct = [&](double s) {
        const double fb = small.rho * small.fp.bpow(-q);
        const double db = small.fp.bpow((small.w[0] - small.eta) * q);
        const auto amax = static_cast<std::int64_t>(std::ceil(small.rho * small.fp.bpow(0.5 * q))) - 1;
        const auto ph = small.phi.eval(s);
        const auto dph = small.phi.deriv(s);
        for (std::int64_t a1 = -amax; a1 <= amax; ++a1)
            for (std::int64_t a2 = -amax; a2 <= amax; ++a2) {
                if (a1 == 0 && a2 == 0) continue;
                const double p = a1 * ph[0] + a2 * ph[1];
                const double dp = a1 * dph[0] + a2 * dph[1];
                if (std::abs(dp) >= db) continue;
                const double a0 = std::nearbyint(-p);
                if (std::abs(a0 + p) < fb) return true;
            }
        return false;
    };
    for (double s : {0.6, 0.8, 1.0, 1.2, 1.4})
        CHECK(eq_membership(small, s, q).member == direct(s));
}

TEST_CASE("nondivergence fraction: monotone in eps, hypothesis reporting") {
    auto cfg = frozen_config();
    const interval_t J{0.5, 1.5};
    auto r1 = nondivergence_fraction(cfg, 3, J, 0.02, 400);
    auto r2 = nondivergence_fraction(cfg, 3, J, 0.06, 400);
    CHECK(r1.fraction <= r2.fraction);
    CHECK(r1.fraction >= 0.0);
    CHECK(r2.fraction <= 1.0);
}

TEST_CASE("shah scan: fixed vector, scaling, empirical constant") {
    auto cfg = frozen_config();
    auto wp = multivector::basis_vector(3, 0);
    CHECK(shah_lower_bound_scan(cfg, wp, 0.0) == Catch::Approx(1.0));

    std::mt19937_64 rng(19);
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    double cmin = std::numeric_limits<double>::infinity();
    for (int trial = 0; trial < 30; ++trial) {
        multivector v(3, 2);
        for (std::int64_t i = 0; i < v.size(); ++i) v[i] = u(rng);
        if (sup_norm(v) < 1e-3) continue;
        const double s1 = shah_lower_bound_scan(cfg, v, 0.5, 128);
        const double s2 = shah_lower_bound_scan(cfg, 2.5 * v, 0.5, 128);
        CHECK(s2 == Catch::Approx(2.5 * s1).epsilon(1e-9));
        cmin = std::min(cmin, s1 / sup_norm(v));
    }
    CHECK(cmin > 0.0);
}
