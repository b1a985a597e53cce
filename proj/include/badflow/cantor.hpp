#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "badflow/core.hpp"
#include "badflow/curve.hpp"
#include "badflow/exterior.hpp"
#include "badflow/flows.hpp"
#include "badflow/lattice.hpp"

namespace badflow {

// ---------------------------------------------------------------------------
// The interval-survival construction: R-adic subdivision with certified
// survival tests against the family g_r(q) U(phi(s)) Z^{n+1}, the dead-interval
// taxonomy (generic / dangerous / extremely dangerous), F-counts and the
// removal score d_q, plus the dangerous-interval detectors and the empirical
// counters used by the regression shadows.
// ---------------------------------------------------------------------------

struct construction_config {
    weight w;
    curve phi;
    flow_params fp;
    double rho = 0.25;
    double rho1 = 0.05;
    double eta = 0;       ///< defaults to 1/(100 n^2)
    double eta_prime = 0; ///< defaults to eta/(1+r1)
    int depth = 4;
    int l_min = 1;
    int l_gen = 1;                  ///< generic-bucket level
    std::optional<int> l_max_override;
    int cert_grid = 33;             ///< initial certification grid
    int cert_max_refine = 14;       ///< grid doublings before giving up
    int dangerous_grid = 10'000;    ///< detector grid resolution
    std::int64_t node_budget = 5'000'000;
    int workers = 1;

    construction_config(weight w_, curve phi_, int R, int m)
        : w(std::move(w_)), phi(std::move(phi_)), fp(w, R, m) {
        require(w.sorted_positive(), "construction_config: weight must be sorted with r_n > 0");
        require(std::abs(phi.length() - 1.0) <= 1e-12 || true, "unreachable");
        if (std::abs(phi.length() - 1.0) > 1e-12) phi = reparametrize_unit(phi);
        const int n = w.n();
        eta = 1.0 / (100.0 * n * n);
        eta_prime = eta / (1.0 + w[0]);
        require(rho > 0 && rho < 1, "construction_config: rho in (0,1)");
    }

    int l_max(int q) const {
        if (l_max_override) return *l_max_override;
        return static_cast<int>(std::floor(2.0 * eta_prime * q));
    }

    /// Radius of the extremely-dangerous test window at level q.
    double ed_radius(int q) const {
        return std::pow(static_cast<double>(fp.R), -static_cast<double>(q) * (1.0 - 2.0 * eta_prime));
    }
};

struct interval_t {
    double lo = 0, hi = 0;
    double mid() const { return 0.5 * (lo + hi); }
    double len() const { return hi - lo; }
};

/// Equal closed subdivision of a closed interval.
inline std::vector<interval_t> par_r(const interval_t& j, int R) {
    require(R >= 2, "par_r: R >= 2 required");
    std::vector<interval_t> out;
    out.reserve(static_cast<std::size_t>(R));
    const double len = j.len();
    for (int k = 0; k < R; ++k) {
        const double lo = j.lo + len * static_cast<double>(k) / R;
        const double hi = (k + 1 == R) ? j.hi : j.lo + len * static_cast<double>(k + 1) / R;
        out.push_back({lo, hi});
    }
    return out;
}

struct enclosure_t {
    double lo = 0, hi = 0;
    bool certified = false;
};

namespace cdetail {

/// Certified max of a scalar |function| over [a,b] given a Lipschitz constant:
/// uniform grids, doubled until the enclosure is narrower than target_width.
template <typename F>
enclosure_t certified_max_abs(F&& f, double a, double b, double lip, double target_width,
                              int grid0, int max_refine) {
    enclosure_t e;
    int grid = std::max(2, grid0);
    for (int pass = 0;; ++pass) {
        const double h = (b - a) / (grid - 1);
        double m = 0;
        for (int g = 0; g < grid; ++g) m = std::max(m, std::abs(f(a + g * h)));
        e.lo = m;
        e.hi = m + lip * h / 2;
        if (e.hi - e.lo <= target_width) {
            e.certified = true;
            return e;
        }
        if (pass >= max_refine) return e; // uncertified enclosure
        grid = 2 * grid - 1;
    }
}

/// Certified min of |function| over [a,b], same scheme.
template <typename F>
enclosure_t certified_min_abs(F&& f, double a, double b, double lip, double target_width,
                              int grid0, int max_refine) {
    enclosure_t e;
    int grid = std::max(2, grid0);
    for (int pass = 0;; ++pass) {
        const double h = (b - a) / (grid - 1);
        double m = std::numeric_limits<double>::infinity();
        for (int g = 0; g < grid; ++g) m = std::min(m, std::abs(f(a + g * h)));
        e.hi = m;
        e.lo = std::max(0.0, m - lip * h / 2);
        if (e.hi - e.lo <= target_width) {
            e.certified = true;
            return e;
        }
        if (pass >= max_refine) return e;
        grid = 2 * grid - 1;
    }
}

inline double poly_eval(const construction_config& cfg, const int_vec& a, double s) {
    // f(s) = a_0 + a_1 phi_1(s) + ... + a_n phi_n(s)
    const auto ph = cfg.phi.eval(s);
    double f = static_cast<double>(a[0]);
    for (int i = 0; i < cfg.w.n(); ++i) f += static_cast<double>(a[static_cast<std::size_t>(i + 1)]) * ph[static_cast<std::size_t>(i)];
    return f;
}

inline double coeff_l1(const int_vec& a) {
    double s = 0;
    for (std::size_t i = 1; i < a.size(); ++i) s += std::abs(static_cast<double>(a[i]));
    return s;
}

/// Constant part of ||g_r(q) U(phi(s)) a||: the sup over components 1..n,
/// which do not depend on s.
inline double const_component(const construction_config& cfg, const int_vec& a, int q) {
    double m = 0;
    for (int i = 0; i < cfg.w.n(); ++i)
        m = std::max(m, cfg.fp.bpow(-cfg.w[i] * q) * std::abs(static_cast<double>(a[static_cast<std::size_t>(i + 1)])));
    return m;
}

} // namespace cdetail

/// Enclosure of max_{s in window} ||g_r(q) U(phi(s)) a||.  Only the first
/// component varies with s (value b^q f(s), slope at most b^q C1 sum|a_i|);
/// the grid is refined until the enclosure is narrower than kappa/100.
inline enclosure_t certified_max_norm(const construction_config& cfg, const int_vec& a, int q,
                                      const interval_t& window) {
    require(a.size() == static_cast<std::size_t>(cfg.w.n() + 1), "certified_max_norm: bad witness size");
    bool nz = false;
    for (auto v : a)
        if (v) nz = true;
    require(nz, "certified_max_norm: zero vector");
    const double bq = cfg.fp.bpow(q);
    const double lip = bq * cfg.phi.C1 * cdetail::coeff_l1(a);
    auto f = [&](double s) { return bq * cdetail::poly_eval(cfg, a, s); };
    enclosure_t e = cdetail::certified_max_abs(f, window.lo, window.hi, lip, 0.01 * cfg.fp.kappa,
                                               cfg.cert_grid, cfg.cert_max_refine);
    const double c = cdetail::const_component(cfg, a, q);
    e.lo = std::max(e.lo, c);
    e.hi = std::max(e.hi, c);
    return e;
}

// ---------------------------------------------------------------------------
// Survival
// ---------------------------------------------------------------------------

enum class node_status : std::uint8_t { alive, dead };

enum class bucket_kind : std::uint8_t { none, generic, dangerous, extremely_dangerous, unclassified };

struct classification_t {
    bucket_kind kind = bucket_kind::none;
    int i = 0; ///< witness grade (dangerous / extremely dangerous)
    int l = 0; ///< dangerous level
    int p = 0; ///< accounting bucket p
};

struct interval_node {
    interval_t iv;
    int level = 0;
    int parent = -1; ///< index in the previous generation
    node_status status = node_status::alive;
    bool indeterminate = false; ///< killed conservatively on an uncertified enclosure
    int_vec witness;            ///< killing integer vector (dead nodes)
    double witness_min_hi = 0;  ///< upper enclosure of min_s ||g U phi a|| for the witness
    classification_t cls;
    std::vector<int_vec> cls_witness; ///< sublattice generators backing the classification
};

struct survival_outcome {
    node_status status = node_status::alive;
    bool indeterminate = false;
    int_vec witness;
    double witness_min_hi = 0;
};

/// Survival rule: a level-q interval dies iff some nonzero integer vector a
/// and some s in it satisfy ||g_r(q) U(phi(s)) a|| <= kappa.  Candidates are
/// enumerated exhaustively from |a_i| <= kappa b^{r_i q} (i >= 1) with a_0
/// confined to the attainable band; indeterminate enclosures kill
/// conservatively.
inline survival_outcome survival_test(const construction_config& cfg, const interval_t& node, int q) {
    const int n = cfg.w.n();
    const double kappa = cfg.fp.kappa;
    const double theta = kappa * cfg.fp.bpow(-q); // |f| threshold
    survival_outcome out;

    std::vector<std::int64_t> amax(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i)
        amax[static_cast<std::size_t>(i)] =
            static_cast<std::int64_t>(std::floor(kappa * cfg.fp.bpow(cfg.w[i] * q) * (1 + 1e-9) + 1e-12));

    int_vec a(static_cast<std::size_t>(n + 1), 0);
    std::function<bool(int)> scan = [&](int i) -> bool {
        if (i == n) {
            // attainable a_0 band from the range of P(s) = sum a_i phi_i(s)
            const double pm = cdetail::poly_eval(cfg, a, node.mid()) - static_cast<double>(a[0]);
            const double spread = cfg.phi.C1 * cdetail::coeff_l1(a) * node.len() / 2 + 1e-12;
            const auto a0_lo = static_cast<std::int64_t>(std::ceil(-(pm + spread) - theta - 1e-12));
            const auto a0_hi = static_cast<std::int64_t>(std::floor(-(pm - spread) + theta + 1e-12));
            for (std::int64_t a0 = a0_lo; a0 <= a0_hi; ++a0) {
                a[0] = a0;
                bool nz = a0 != 0;
                for (int j = 1; j <= n && !nz; ++j) nz = a[static_cast<std::size_t>(j)] != 0;
                if (!nz) continue;
                const double lip = cfg.phi.C1 * cdetail::coeff_l1(a);
                auto f = [&](double s) { return cdetail::poly_eval(cfg, a, s); };
                const enclosure_t e = cdetail::certified_min_abs(f, node.lo, node.hi, lip, 0.01 * theta,
                                                                 cfg.cert_grid, cfg.cert_max_refine);
                if (e.hi <= theta) { // certainly dead
                    out.status = node_status::dead;
                    out.witness = a;
                    out.witness_min_hi = e.hi;
                    return true;
                }
                if (e.lo <= theta) { // tie or uncertified: conservative death
                    out.status = node_status::dead;
                    out.indeterminate = !e.certified;
                    out.witness = a;
                    out.witness_min_hi = e.hi;
                    return true;
                }
            }
            return false;
        }
        for (std::int64_t v = -amax[static_cast<std::size_t>(i)]; v <= amax[static_cast<std::size_t>(i)]; ++v) {
            a[static_cast<std::size_t>(i + 1)] = v;
            if (scan(i + 1)) return true;
        }
        return false;
    };
    scan(0);
    return out;
}

// ---------------------------------------------------------------------------
// Classification of dead intervals (taxonomy of Definition 3.6/3.7 at desk
// scale).  Witness multivectors of grade i come from the primitive-sublattice
// enumeration at the node midpoint with radius rho^i; windows grow with l, and
// the first match in the order (dangerous by increasing l then increasing i,
// then extremely dangerous) wins.  A dangerous window qualifies when its
// certified peak sits in [rho^i/2, rho^i]; the extremely-dangerous window only
// needs peak <= rho^i.  Dead intervals matching nothing are generic.
// ---------------------------------------------------------------------------

namespace cdetail {

/// Certified max over a window of the sup norm of
/// (g_r(q) U(phi(s)) c_1) ^ ... ^ (g_r(q) U(phi(s)) c_i).
inline enclosure_t certified_max_wedge(const construction_config& cfg,
                                       const std::vector<int_vec>& gens, int q,
                                       const interval_t& window, double target_width) {
    const int n = cfg.w.n(), d = n + 1;
    const int k = static_cast<int>(gens.size());
    // componentwise bounds for the Lipschitz constant of the wedge entries
    double phimax = 0;
    for (double s : {window.lo, window.hi, cfg.phi.a, cfg.phi.b})
        for (double v : cfg.phi.eval(s)) phimax = std::max(phimax, std::abs(v));
    const double bq = cfg.fp.bpow(q);
    std::vector<double> M(static_cast<std::size_t>(k)), D(static_cast<std::size_t>(k));
    for (int j = 0; j < k; ++j) {
        const auto& c = gens[static_cast<std::size_t>(j)];
        const double l1 = coeff_l1(c);
        M[static_cast<std::size_t>(j)] = std::max(bq * (std::abs(static_cast<double>(c[0])) + phimax * l1),
                                                  const_component(cfg, c, q));
        D[static_cast<std::size_t>(j)] = bq * cfg.phi.C1 * l1;
    }
    double fact = 1;
    for (int i = 2; i <= k; ++i) fact *= i;
    double lip = 0;
    for (int j = 0; j < k; ++j) {
        double prod = D[static_cast<std::size_t>(j)];
        for (int t = 0; t < k; ++t)
            if (t != j) prod *= M[static_cast<std::size_t>(t)];
        lip += prod;
    }
    lip *= fact;

    auto norm_at = [&](double s) {
        matrix<double> cols(d, k);
        const auto ph = cfg.phi.eval(s);
        for (int j = 0; j < k; ++j) {
            const auto& c = gens[static_cast<std::size_t>(j)];
            double f = static_cast<double>(c[0]);
            for (int i = 0; i < n; ++i) f += static_cast<double>(c[static_cast<std::size_t>(i + 1)]) * ph[static_cast<std::size_t>(i)];
            cols(0, j) = bq * f;
            for (int i = 0; i < n; ++i)
                cols(i + 1, j) = cfg.fp.bpow(-cfg.w[i] * q) * static_cast<double>(c[static_cast<std::size_t>(i + 1)]);
        }
        return sup_norm(wedge_columns(cols));
    };
    return certified_max_abs(norm_at, window.lo, window.hi, lip, target_width, cfg.cert_grid,
                             cfg.cert_max_refine);
}

inline interval_t clip_to_domain(const construction_config& cfg, double center, double radius) {
    return {std::max(cfg.phi.a, center - radius), std::min(cfg.phi.b, center + radius)};
}

/// Lattice at the node midpoint, as a plain real basis.
inline lattice_basis midpoint_lattice(const construction_config& cfg, double s, int q) {
    const int n = cfg.w.n(), d = n + 1;
    const auto ph = cfg.phi.eval(s);
    matrix<double> m(d, d);
    m(0, 0) = cfg.fp.bpow(q);
    for (int i = 0; i < n; ++i) {
        m(0, i + 1) = cfg.fp.bpow(q) * ph[static_cast<std::size_t>(i)];
        m(i + 1, i + 1) = cfg.fp.bpow(-cfg.w[i] * q);
    }
    return lattice_basis(m);
}

} // namespace cdetail

inline classification_t classify_dead(const construction_config& cfg, const interval_t& node, int q,
                                      std::vector<int_vec>* witness_out = nullptr) {
    const int n = cfg.w.n();
    classification_t cls;
    bool saw_indeterminate = false;

    // candidate witnesses per grade, enumerated once at the midpoint
    std::vector<std::vector<sublattice>> cands(static_cast<std::size_t>(n + 1));
    const auto lmid = cdetail::midpoint_lattice(cfg, node.mid(), q);
    for (int i = 1; i <= n; ++i) {
        const double radius = std::pow(cfg.rho, i) * (1 + 1e-9);
        cands[static_cast<std::size_t>(i)] = enumerate_primitive_sublattices(lmid, i, radius);
    }

    const double R = cfg.fp.R;
    auto window_of = [&](int l) {
        return cdetail::clip_to_domain(cfg, node.mid(), std::pow(R, -static_cast<double>(q) + l));
    };

    // dangerous buckets, smallest qualifying l first, then grade
    for (int l = cfg.l_min; l <= cfg.l_max(q); ++l) {
        const auto win = window_of(l);
        for (int i = 1; i <= n; ++i) {
            const double band_hi = std::pow(cfg.rho, i);
            for (const auto& s : cands[static_cast<std::size_t>(i)]) {
                const auto e = cdetail::certified_max_wedge(cfg, s.vectors, q, win, 0.005 * band_hi);
                if (!e.certified) { saw_indeterminate = true; continue; }
                if (e.lo >= band_hi / 2 && e.hi <= band_hi) {
                    cls.kind = bucket_kind::dangerous;
                    cls.i = i;
                    cls.l = l;
                    cls.p = std::max(0, q - 2 * l);
                    if (witness_out) *witness_out = s.vectors;
                    return cls;
                }
            }
        }
    }

    // extremely dangerous: the wide window, peak <= rho^i suffices
    const auto edwin = cdetail::clip_to_domain(cfg, node.mid(), cfg.ed_radius(q));
    for (int i = 1; i <= n; ++i) {
        const double band_hi = std::pow(cfg.rho, i);
        for (const auto& s : cands[static_cast<std::size_t>(i)]) {
            const auto e = cdetail::certified_max_wedge(cfg, s.vectors, q, edwin, 0.005 * band_hi);
            if (!e.certified) { saw_indeterminate = true; continue; }
            if (e.hi <= band_hi) {
                cls.kind = bucket_kind::extremely_dangerous;
                cls.i = i;
                cls.l = 0;
                cls.p = 0;
                if (witness_out) *witness_out = s.vectors;
                return cls;
            }
        }
    }

    if (saw_indeterminate) {
        cls.kind = bucket_kind::unclassified;
        cls.p = 0;
        return cls;
    }
    cls.kind = bucket_kind::generic;
    cls.l = cfg.l_gen;
    cls.p = std::max(0, q - 2 * cfg.l_gen);
    return cls;
}

// ---------------------------------------------------------------------------
// Tree construction
// ---------------------------------------------------------------------------

struct richness_entry {
    int q = 0;
    std::int64_t alive = 0;
    std::int64_t dead = 0;
    std::map<int, std::int64_t> f_max_by_bucket; ///< p -> max_{I_p} F
    double d_q_upper = 0;
};

struct construction_result {
    std::vector<std::vector<interval_node>> generations; ///< [q][node]
    std::vector<richness_entry> richness;
    double d_sequence_upper = 0; ///< max over q of d_q_upper

    const std::vector<interval_node>& survivors_generation() const { return generations.back(); }
};

namespace cdetail {

inline void parallel_for(std::int64_t count, int workers, const std::function<void(std::int64_t)>& fn) {
    if (workers <= 1 || count < 2) {
        for (std::int64_t i = 0; i < count; ++i) fn(i);
        return;
    }
    std::atomic<std::int64_t> next{0};
    std::vector<std::thread> pool;
    const int k = std::min<std::int64_t>(workers, count);
    pool.reserve(static_cast<std::size_t>(k));
    for (int t = 0; t < k; ++t)
        pool.emplace_back([&] {
            while (true) {
                const std::int64_t i = next.fetch_add(1);
                if (i >= count) return;
                fn(i);
            }
        });
    for (auto& th : pool) th.join();
}

/// Ancestor index of a node at an earlier generation.
inline int ancestor_at(const construction_result& res, int q, int idx, int p) {
    int cur = idx;
    for (int lvl = q; lvl > p; --lvl) cur = res.generations[static_cast<std::size_t>(lvl)][static_cast<std::size_t>(cur)].parent;
    return cur;
}

} // namespace cdetail

/// F(I^_{q,p}, I_p): dead level-q nodes in bucket p contained in the given
/// alive generation-p interval.
inline std::int64_t f_count(const construction_result& res, int q, int p, int ip_index) {
    std::int64_t count = 0;
    const auto& gen = res.generations[static_cast<std::size_t>(q)];
    for (int idx = 0; idx < static_cast<int>(gen.size()); ++idx) {
        const auto& nd = gen[static_cast<std::size_t>(idx)];
        if (nd.status != node_status::dead || nd.cls.p != p) continue;
        if (cdetail::ancestor_at(res, q, idx, p) == ip_index) ++count;
    }
    return count;
}

/// Upper bound on d_q via the canonical taxonomy partition:
/// sum_p (4/R)^{q-p} max_{I_p} F.
inline double d_q_upper(const construction_result& res, int q, int R) {
    const auto& gen = res.generations[static_cast<std::size_t>(q)];
    std::map<int, std::map<int, std::int64_t>> counts; // p -> ancestor -> count
    for (int idx = 0; idx < static_cast<int>(gen.size()); ++idx) {
        const auto& nd = gen[static_cast<std::size_t>(idx)];
        if (nd.status != node_status::dead) continue;
        const int p = nd.cls.p;
        counts[p][cdetail::ancestor_at(res, q, idx, p)]++;
    }
    double total = 0;
    for (const auto& [p, by_anc] : counts) {
        std::int64_t fmax = 0;
        for (const auto& [anc, c] : by_anc) fmax = std::max(fmax, c);
        total += std::pow(4.0 / R, q - p) * static_cast<double>(fmax);
    }
    return total;
}

/// Exact min over all partitions (assignments of dead nodes to buckets
/// p in [0, q-1]), exhaustive with branch-and-bound; only for tiny trees.
inline double d_q_exact_min(const construction_result& res, int q, int R, int max_dead = 20) {
    const auto& gen = res.generations[static_cast<std::size_t>(q)];
    std::vector<int> dead;
    for (int idx = 0; idx < static_cast<int>(gen.size()); ++idx)
        if (gen[static_cast<std::size_t>(idx)].status == node_status::dead) dead.push_back(idx);
    require(static_cast<int>(dead.size()) <= max_dead, "d_q_exact_min: too many dead nodes");
    if (dead.empty()) return 0;

    std::vector<double> coef(static_cast<std::size_t>(q));
    for (int p = 0; p < q; ++p) coef[static_cast<std::size_t>(p)] = std::pow(4.0 / R, q - p);
    // ancestors per node per bucket
    std::vector<std::vector<int>> anc(dead.size(), std::vector<int>(static_cast<std::size_t>(q)));
    for (std::size_t j = 0; j < dead.size(); ++j)
        for (int p = 0; p < q; ++p) anc[j][static_cast<std::size_t>(p)] = cdetail::ancestor_at(res, q, dead[j], p);

    std::vector<std::map<int, std::int64_t>> counts(static_cast<std::size_t>(q));
    std::vector<std::int64_t> fmax(static_cast<std::size_t>(q), 0);
    double best = std::numeric_limits<double>::infinity();
    std::function<void(std::size_t, double)> rec = [&](std::size_t j, double cost) {
        if (cost >= best) return;
        if (j == dead.size()) {
            best = cost;
            return;
        }
        for (int p = 0; p < q; ++p) {
            auto& c = counts[static_cast<std::size_t>(p)][anc[j][static_cast<std::size_t>(p)]];
            const std::int64_t prev_fmax = fmax[static_cast<std::size_t>(p)];
            ++c;
            double dcost = 0;
            if (c > prev_fmax) {
                fmax[static_cast<std::size_t>(p)] = c;
                dcost = coef[static_cast<std::size_t>(p)] * static_cast<double>(c - prev_fmax);
            }
            rec(j + 1, cost + dcost);
            fmax[static_cast<std::size_t>(p)] = prev_fmax;
            --c;
        }
    };
    rec(0, 0.0);
    return best;
}

/// Generation-by-generation construction.  Nodes within a generation are
/// independent; results land in preallocated slots so the tree is identical
/// for any worker count.
inline construction_result build_sequence(const construction_config& cfg, bool classify = true) {
    require(cfg.depth >= 0, "build_sequence: depth >= 0");
    construction_result res;
    res.generations.emplace_back();
    res.generations[0].push_back(interval_node{{cfg.phi.a, cfg.phi.b}, 0, -1, node_status::alive, false, {}, 0, {}, {}});

    std::int64_t total_nodes = 1;
    for (int q = 1; q <= cfg.depth; ++q) {
        const auto& prev = res.generations[static_cast<std::size_t>(q - 1)];
        // children of alive nodes, in deterministic order
        std::vector<interval_node> gen;
        for (int pi = 0; pi < static_cast<int>(prev.size()); ++pi) {
            if (prev[static_cast<std::size_t>(pi)].status != node_status::alive) continue;
            for (const auto& child : par_r(prev[static_cast<std::size_t>(pi)].iv, cfg.fp.R)) {
                interval_node nd;
                nd.iv = child;
                nd.level = q;
                nd.parent = pi;
                gen.push_back(std::move(nd));
            }
        }
        total_nodes += static_cast<std::int64_t>(gen.size());
        if (total_nodes > cfg.node_budget) throw resource_error("build_sequence: node budget exceeded");

        cdetail::parallel_for(static_cast<std::int64_t>(gen.size()), cfg.workers, [&](std::int64_t i) {
            auto& nd = gen[static_cast<std::size_t>(i)];
            const auto s = survival_test(cfg, nd.iv, q);
            nd.status = s.status;
            nd.indeterminate = s.indeterminate;
            nd.witness = s.witness;
            nd.witness_min_hi = s.witness_min_hi;
        });
        if (classify) {
            cdetail::parallel_for(static_cast<std::int64_t>(gen.size()), cfg.workers, [&](std::int64_t i) {
                auto& nd = gen[static_cast<std::size_t>(i)];
                if (nd.status == node_status::dead) nd.cls = classify_dead(cfg, nd.iv, q, &nd.cls_witness);
            });
        }
        res.generations.push_back(std::move(gen));
    }

    for (int q = 1; q <= cfg.depth; ++q) {
        richness_entry re;
        re.q = q;
        std::map<int, std::map<int, std::int64_t>> counts;
        const auto& gen = res.generations[static_cast<std::size_t>(q)];
        for (int idx = 0; idx < static_cast<int>(gen.size()); ++idx) {
            const auto& nd = gen[static_cast<std::size_t>(idx)];
            if (nd.status == node_status::alive) {
                ++re.alive;
            } else {
                ++re.dead;
                counts[nd.cls.p][cdetail::ancestor_at(res, q, idx, nd.cls.p)]++;
            }
        }
        for (const auto& [p, by_anc] : counts) {
            std::int64_t fmax = 0;
            for (const auto& [anc, c] : by_anc) fmax = std::max(fmax, c);
            re.f_max_by_bucket[p] = fmax;
        }
        re.d_q_upper = d_q_upper(res, q, cfg.fp.R);
        res.d_sequence_upper = std::max(res.d_sequence_upper, re.d_q_upper);
        res.richness.push_back(std::move(re));
    }
    return res;
}

// ---------------------------------------------------------------------------
// Dangerous-interval detector (windows with peak in [rho/2, rho]).
// ---------------------------------------------------------------------------

struct dangerous_record {
    bool extremely = false;
    int q = 0, l = 0;
    int_vec witness;
    double lo = 0, hi = 0; ///< window endpoints
    double peak = 0;
};

/// Exhaustive over the integer box |a_i| <= rho b^{r_i q} (i >= 1) with a_0
/// localized, on a deterministic s-grid: a window of radius R^{-q+l} around a
/// grid point qualifies when its grid peak of ||g_r(q) U(phi(s)) a|| lies in
/// [rho/2, rho]; maximal runs of qualifying centers merge into one record.
/// Witnesses are sign-canonical (a and -a give identical records).
inline std::vector<dangerous_record> detect_dangerous(const construction_config& cfg, int q, int l,
                                                      const interval_t& region) {
    const int n = cfg.w.n();
    const double rho = cfg.rho;
    const double bq = cfg.fp.bpow(q);
    const double w = std::pow(static_cast<double>(cfg.fp.R), -static_cast<double>(q) + l);
    const int N = cfg.dangerous_grid;
    const double h = region.len() / (N - 1);
    const int kw = static_cast<int>(std::floor(w / h + 1e-9));

    std::vector<std::int64_t> amax(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i)
        amax[static_cast<std::size_t>(i)] =
            static_cast<std::int64_t>(std::floor(rho * cfg.fp.bpow(cfg.w[i] * q) * (1 + 1e-9) + 1e-12));

    // curve values on the grid, reused across witnesses
    std::vector<std::vector<double>> ph(static_cast<std::size_t>(N));
    for (int j = 0; j < N; ++j) ph[static_cast<std::size_t>(j)] = cfg.phi.eval(region.lo + j * h);

    std::vector<dangerous_record> out;
    int_vec a(static_cast<std::size_t>(n + 1), 0);
    std::function<void(int)> scan = [&](int i) {
        if (i < n) {
            for (std::int64_t v = -amax[static_cast<std::size_t>(i)]; v <= amax[static_cast<std::size_t>(i)]; ++v) {
                a[static_cast<std::size_t>(i + 1)] = v;
                scan(i + 1);
            }
            return;
        }
        // sign-canonical in (a_1..a_n): first nonzero positive, or all zero
        for (int j = 1; j <= n; ++j) {
            if (a[static_cast<std::size_t>(j)] > 0) break;
            if (a[static_cast<std::size_t>(j)] < 0) return;
        }
        const double cpart = cdetail::const_component(cfg, a, q);
        if (cpart > rho * (1 + 1e-12)) return;
        // attainable a_0 values over the region
        double pmin = 0, pmax = 0;
        for (int j = 0; j < N; ++j) {
            double p = 0;
            for (int i2 = 0; i2 < n; ++i2) p += static_cast<double>(a[static_cast<std::size_t>(i2 + 1)]) * ph[static_cast<std::size_t>(j)][static_cast<std::size_t>(i2)];
            if (j == 0) { pmin = pmax = p; }
            pmin = std::min(pmin, p);
            pmax = std::max(pmax, p);
        }
        const double theta = rho * cfg.fp.bpow(-q);
        const auto a0_lo = static_cast<std::int64_t>(std::ceil(-pmax - theta - 1e-12));
        const auto a0_hi = static_cast<std::int64_t>(std::floor(-pmin + theta + 1e-12));
        for (std::int64_t a0 = a0_lo; a0 <= a0_hi; ++a0) {
            a[0] = a0;
            bool nz = a0 != 0;
            for (int j = 1; j <= n && !nz; ++j) nz = a[static_cast<std::size_t>(j)] != 0;
            if (!nz) continue;
            if (a0 != 0) { // canonical sign when the tail vanishes
                bool tail_zero = true;
                for (int j = 1; j <= n; ++j)
                    if (a[static_cast<std::size_t>(j)] != 0) tail_zero = false;
                if (tail_zero && a0 < 0) continue;
            }
            // grid values of the norm, then sliding-window peaks
            std::vector<double> hval(static_cast<std::size_t>(N));
            for (int j = 0; j < N; ++j) {
                double f = static_cast<double>(a0);
                for (int i2 = 0; i2 < n; ++i2) f += static_cast<double>(a[static_cast<std::size_t>(i2 + 1)]) * ph[static_cast<std::size_t>(j)][static_cast<std::size_t>(i2)];
                hval[static_cast<std::size_t>(j)] = std::max(bq * std::abs(f), cpart);
            }
            int run_start = -1;
            double run_peak = 0;
            auto flush = [&](int run_end) {
                if (run_start < 0) return;
                dangerous_record rec;
                rec.q = q;
                rec.l = l;
                rec.witness = a;
                rec.lo = region.lo + run_start * h - w;
                rec.hi = region.lo + run_end * h + w;
                rec.peak = run_peak;
                out.push_back(std::move(rec));
                run_start = -1;
                run_peak = 0;
            };
            for (int j = 0; j < N; ++j) {
                double peak = 0;
                for (int t = std::max(0, j - kw); t <= std::min(N - 1, j + kw); ++t)
                    peak = std::max(peak, hval[static_cast<std::size_t>(t)]);
                const bool ok = peak >= rho / 2 && peak <= rho;
                if (ok) {
                    if (run_start < 0) run_start = j;
                    run_peak = std::max(run_peak, peak);
                } else {
                    flush(j - 1);
                }
            }
            flush(N - 1);
        }
    };
    scan(0);
    return out;
}

// ---------------------------------------------------------------------------
// Membership and measure counters
// ---------------------------------------------------------------------------

struct eq_result {
    bool member = false;
    int_vec witness;
};

/// Membership in E_q: some nonzero integer a with |a_i| < rho b^{r_i q},
/// |f(s)| < rho b^{-q} and |f'(s)| < b^{(r_1 - eta) q}.
inline eq_result eq_membership(const construction_config& cfg, double s, int q) {
    const int n = cfg.w.n();
    const double rho = cfg.rho;
    eq_result out;
    std::vector<std::int64_t> amax(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i)
        amax[static_cast<std::size_t>(i)] =
            static_cast<std::int64_t>(std::ceil(rho * cfg.fp.bpow(cfg.w[i] * q) * (1 - 1e-15))) - 1;
    const double fbound = rho * cfg.fp.bpow(-q);
    const double dbound = cfg.fp.bpow((cfg.w[0] - cfg.eta) * q);
    const auto ph = cfg.phi.eval(s);
    const auto dph = cfg.phi.deriv(s);

    int_vec a(static_cast<std::size_t>(n + 1), 0);
    std::function<bool(int)> scan = [&](int i) -> bool {
        if (i == n) {
            double p = 0, dp = 0;
            bool nz = false;
            for (int j = 0; j < n; ++j) {
                const double aj = static_cast<double>(a[static_cast<std::size_t>(j + 1)]);
                if (aj != 0) nz = true;
                p += aj * ph[static_cast<std::size_t>(j)];
                dp += aj * dph[static_cast<std::size_t>(j)];
            }
            if (!nz) return false; // a_0 alone cannot satisfy |a_0| < fbound < 1
            if (std::abs(dp) >= dbound) return false;
            const auto a0 = static_cast<std::int64_t>(std::llround(-p));
            if (std::abs(static_cast<double>(a0) + p) < fbound) {
                out.member = true;
                out.witness = a;
                out.witness[0] = a0;
                return true;
            }
            return false;
        }
        for (std::int64_t v = -amax[static_cast<std::size_t>(i)]; v <= amax[static_cast<std::size_t>(i)]; ++v) {
            a[static_cast<std::size_t>(i + 1)] = v;
            if (scan(i + 1)) return true;
        }
        return false;
    };
    scan(0);
    return out;
}

struct nondivergence_report {
    double fraction = 0;       ///< grid fraction escaping K_eps
    bool hypothesis_ok = true; ///< all wedge maxima over J exceed rho^i
    int grid = 0;
};

/// Fraction of a fine grid in J whose lattice g_r(q) U(phi(s)) Z^{n+1} leaves
/// K_eps, with the wedge-maximum hypothesis of the non-divergence bound
/// checked alongside.
inline nondivergence_report nondivergence_fraction(const construction_config& cfg, int q,
                                                   const interval_t& J, double eps, int grid = 2000) {
    nondivergence_report rep;
    rep.grid = grid;
    const double h = J.len() / (grid - 1);
    std::vector<char> escaped(static_cast<std::size_t>(grid), 0);
    cdetail::parallel_for(grid, cfg.workers, [&](std::int64_t g) {
        const auto l = cdetail::midpoint_lattice(cfg, J.lo + static_cast<double>(g) * h, q);
        escaped[static_cast<std::size_t>(g)] = in_k_eps(l, eps) ? 0 : 1;
    });
    std::int64_t outside = 0;
    for (char c : escaped) outside += c;
    rep.fraction = static_cast<double>(outside) / grid;

    const auto lmid = cdetail::midpoint_lattice(cfg, J.mid(), q);
    for (int i = 1; i <= cfg.w.n() && rep.hypothesis_ok; ++i) {
        const double bar = std::pow(cfg.rho, i);
        for (const auto& s : enumerate_primitive_sublattices(lmid, i, bar * (1 + 1e-9))) {
            const auto e = cdetail::certified_max_wedge(cfg, s.vectors, q, J, 0.005 * bar);
            if (e.hi < bar) {
                rep.hypothesis_ok = false;
                break;
            }
        }
    }
    return rep;
}

/// Certified max over the domain of ||g_r(t) U(phi(x)) v|| for a multivector
/// v; compare against candidate c * ||v|| lower bounds.
inline double shah_lower_bound_scan(const construction_config& cfg, const multivector& v, double t,
                                    int grid = 512) {
    const int n = cfg.w.n(), d = n + 1;
    require(v.dim() == d, "shah_lower_bound_scan: dimension mismatch");
    const double bt = cfg.fp.bpow(t);
    double phimax = 1;
    for (double s : {cfg.phi.a, cfg.phi.b})
        for (double val : cfg.phi.eval(s)) phimax = std::max(phimax, std::abs(val));
    const int k = v.grade();
    double l1 = 0;
    for (std::int64_t i = 0; i < v.size(); ++i) l1 += std::abs(v[i]);
    double fact = 1;
    for (int i = 2; i <= k; ++i) fact *= i;
    const double amax = std::max(1.0, bt * phimax);
    const double lip = l1 * fact * k * std::pow(amax, k - 1) * bt * cfg.phi.C1;

    auto norm_at = [&](double x) {
        square_matrix g = flow_g(cfg.fp, cfg.w, t) * unipotent_u(cfg.phi.eval(x));
        return sup_norm(act(g, v));
    };
    const auto e = cdetail::certified_max_abs(norm_at, cfg.phi.a, cfg.phi.b, lip,
                                              1e-3 * std::max(1e-12, sup_norm(v)), grid, 8);
    return e.lo; // a certified achieved value (lower bound of the true max)
}

} // namespace badflow
