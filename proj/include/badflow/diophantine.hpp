#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "badflow/core.hpp"
#include "badflow/flows.hpp"
#include "badflow/lattice.hpp"
#include "badflow/rational.hpp"

namespace badflow {

// ---------------------------------------------------------------------------
// Badness tests.  Point coordinates are exact rationals: the quantities of
// interest are distances q*x - p that can sit many orders of magnitude below
// the rounding noise of double arithmetic on q*x.  Scans run a double screen
// and fall back to exact evaluation only near the decision margin.
// ---------------------------------------------------------------------------

struct badness_report {
    double constant = 0;              ///< min over the horizon of max_i |q|^{r_i} dist(q x_i)
    std::vector<std::int64_t> witness; ///< (p_1..p_n, q) achieving it
    std::int64_t horizon = 0;
};

namespace detail {

/// Absolute representation error |x - double(x)| per coordinate, rounded up.
inline std::vector<double> repr_errors(const point& x) {
    std::vector<double> out;
    out.reserve(x.size());
    for (const auto& xi : x) {
        bigq d = xi - bigq(xi.get_d());
        if (d < 0) d = -d;
        out.push_back(d.get_d() * (1 + 1e-9) + 1e-300);
    }
    return out;
}

} // namespace detail

/// Dirichlet witness: scan q = 1..floor(N), p_i = nearest integer to -q x_i,
/// return the q minimizing the normalized defect max_i N^{r_i} |q x_i + p_i|
/// (ties to the smallest q).  Existence is guaranteed by the theorem; the
/// boundary is accepted with 1e-12 slack.
inline std::vector<std::int64_t> dirichlet_witness(const point& x, const weight& w, double N) {
    require(N > 1, "dirichlet_witness: N > 1 required");
    require(static_cast<int>(x.size()) == w.n(), "dirichlet_witness: dimension mismatch");
    const int n = w.n();
    const auto qmax = static_cast<std::int64_t>(std::floor(N));
    double best = -1;
    std::vector<std::int64_t> witness;
    for (std::int64_t q = 1; q <= qmax; ++q) {
        double defect = 0;
        std::vector<std::int64_t> p(static_cast<std::size_t>(n));
        for (int i = 0; i < n; ++i) {
            const bigq qx = bigq(static_cast<long>(q)) * x[static_cast<std::size_t>(i)];
            const bigz pi = -round_nearest(qx);
            if (!pi.fits_slong_p()) throw resource_error("dirichlet_witness: witness overflow");
            p[static_cast<std::size_t>(i)] = pi.get_si();
            const double err = bigq(qx + bigq(pi)).get_d();
            defect = std::max(defect, std::pow(N, w[i]) * std::abs(err));
        }
        if (best < 0 || defect < best) {
            best = defect;
            witness = p;
            witness.push_back(q);
        }
    }
    require(best <= 1.0 + 1e-12, "dirichlet_witness: no witness found (should be impossible)");
    return witness;
}

/// Direct badness constant at a finite horizon:
///   min over 0 < q <= Q of max_i q^{r_i} dist(q x_i, Z).
/// Negative q give the same values by symmetry.  Monotone nonincreasing in Q.
inline badness_report badness_constant_direct(const point& x, const weight& w, std::int64_t Q) {
    require(Q >= 1, "badness_constant_direct: Q >= 1 required");
    require(static_cast<int>(x.size()) == w.n(), "badness_constant_direct: dimension mismatch");
    const int n = w.n();
    const auto xd = point_to_doubles(x);
    const auto delta = detail::repr_errors(x);

    auto exact_value = [&](std::int64_t q, std::vector<std::int64_t>* wit) {
        double v = 0;
        for (int i = 0; i < n; ++i) {
            const bigq qx = bigq(static_cast<long>(q)) * x[static_cast<std::size_t>(i)];
            const double dist = dist_to_int(qx).get_d();
            if (wit) {
                const bigz pi = -round_nearest(qx);
                if (!pi.fits_slong_p()) throw resource_error("badness witness overflow");
                (*wit)[static_cast<std::size_t>(i)] = pi.get_si();
            }
            v = std::max(v, std::pow(static_cast<double>(q), w[i]) * dist);
        }
        return v;
    };

    double best = -1;
    std::int64_t best_q = 1;
    for (std::int64_t q = 1; q <= Q; ++q) {
        // double screen with certified error margin
        double vd = 0, err = 0;
        for (int i = 0; i < n; ++i) {
            const double y = static_cast<double>(q) * xd[static_cast<std::size_t>(i)];
            const double dist = std::abs(y - std::nearbyint(y));
            const double qe = std::pow(static_cast<double>(q), w[i]);
            vd = std::max(vd, qe * dist);
            err = std::max(err, qe * (static_cast<double>(q) * delta[static_cast<std::size_t>(i)] +
                                      4 * std::abs(y) * 2.3e-16 + 1e-300));
        }
        if (best >= 0 && vd - err >= best) continue;
        const double v = exact_value(q, nullptr);
        if (best < 0 || v < best) {
            best = v;
            best_q = q;
        }
    }
    badness_report rep;
    rep.constant = best;
    rep.horizon = Q;
    rep.witness.assign(static_cast<std::size_t>(n + 1), 0);
    std::vector<std::int64_t> p(static_cast<std::size_t>(n));
    exact_value(best_q, &p);
    for (int i = 0; i < n; ++i) rep.witness[static_cast<std::size_t>(i)] = p[static_cast<std::size_t>(i)];
    rep.witness[static_cast<std::size_t>(n)] = best_q;
    return rep;
}

struct dual_threshold_report {
    double constant = 0;               ///< min over N <= Q of N * best box defect
    std::vector<std::int64_t> witness; ///< (a_1..a_n) achieving it
    std::int64_t N = 0;                ///< admission scale of the witness
    std::int64_t horizon = 0;
};

/// Largest c (up to the horizon) for which the dual system
///   |a_0 + a_1 x_1 + ... + a_n x_n| < c/N,  |a_i| < N^{r_i}
/// has only the zero solution for every N <= Q:
///   min over nonzero a of N_a * dist(sum a_i x_i),
/// where N_a is the smallest integer scale admitting a.  For a bounded point
/// this decreases to the classical threshold from above (Fibonacci records for
/// the golden ratio).
inline dual_threshold_report dual_badness_constant(const point& x, const weight& w, std::int64_t Q) {
    require(Q >= 2, "dual_badness_constant: Q >= 2 required");
    require(static_cast<int>(x.size()) == w.n(), "dual_badness_constant: dimension mismatch");
    const int n = w.n();
    const auto xd = point_to_doubles(x);
    const auto delta = detail::repr_errors(x);
    std::vector<std::int64_t> amax(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i)
        amax[static_cast<std::size_t>(i)] =
            static_cast<std::int64_t>(std::floor(std::pow(static_cast<double>(Q), w[i]) * (1 - 1e-15)));

    dual_threshold_report rep;
    rep.horizon = Q;
    rep.constant = -1;
    std::vector<std::int64_t> a(static_cast<std::size_t>(n), 0);
    std::function<void(int)> rec = [&](int i) {
        if (i == n) {
            bool nz = false;
            for (auto v : a)
                if (v) nz = true;
            if (!nz) return;
            // smallest admissible integer scale: N > |a_i|^{1/r_i} for all i
            double thresh = 0;
            for (int j = 0; j < n; ++j)
                if (a[static_cast<std::size_t>(j)] != 0)
                    thresh = std::max(thresh, std::pow(std::abs(static_cast<double>(a[static_cast<std::size_t>(j)])),
                                                       1.0 / w[j]));
            auto Na = static_cast<std::int64_t>(std::floor(thresh + 1e-9)) + 1;
            Na = std::max<std::int64_t>(Na, 2);
            if (Na > Q) return;
            double sd = 0, err = 0;
            for (int j = 0; j < n; ++j) {
                sd += static_cast<double>(a[static_cast<std::size_t>(j)]) * xd[static_cast<std::size_t>(j)];
                err += std::abs(static_cast<double>(a[static_cast<std::size_t>(j)])) * delta[static_cast<std::size_t>(j)];
            }
            err += 4 * (std::abs(sd) + 1) * 2.3e-16;
            const double dd = std::abs(sd - std::nearbyint(sd));
            const double cand = static_cast<double>(Na) * dd;
            if (rep.constant >= 0 && cand - static_cast<double>(Na) * err >= rep.constant) return;
            bigq s(0);
            for (int j = 0; j < n; ++j)
                s += bigq(static_cast<long>(a[static_cast<std::size_t>(j)])) * x[static_cast<std::size_t>(j)];
            const double v = static_cast<double>(Na) * dist_to_int(s).get_d();
            if (rep.constant < 0 || v < rep.constant) {
                rep.constant = v;
                rep.witness = a;
                rep.N = Na;
            }
        } else {
            for (std::int64_t v = -amax[static_cast<std::size_t>(i)]; v <= amax[static_cast<std::size_t>(i)]; ++v) {
                a[static_cast<std::size_t>(i)] = v;
                rec(i + 1);
            }
        }
    };
    rec(0);
    if (rep.constant < 0) rep.constant = 0;
    return rep;
}

struct dual_scan_options {
    std::int64_t box_cap = 20'000'000;
};

/// Dual test: true iff the only integer solution of
///   |a_0 + a_1 x_1 + ... + a_n x_n| < c/N,  |a_i| < N^{r_i}
/// is zero.  Exhaustive over the box.
inline bool dual_only_zero_solution(const point& x, const weight& w, double c, double N,
                                    dual_scan_options opt = {}) {
    require(c > 0, "dual_only_zero_solution: c > 0 required");
    require(N >= 1, "dual_only_zero_solution: N >= 1 required");
    require(static_cast<int>(x.size()) == w.n(), "dual_only_zero_solution: dimension mismatch");
    const double bound = c / N;
    if (bound > 1.0) return false; // a = (1, 0, ..., 0) qualifies
    const int n = w.n();
    std::vector<std::int64_t> amax(static_cast<std::size_t>(n));
    double box = 1;
    for (int i = 0; i < n; ++i) {
        amax[static_cast<std::size_t>(i)] = static_cast<std::int64_t>(std::floor(std::pow(N, w[i]) * (1 - 1e-15)));
        box *= 2 * static_cast<double>(amax[static_cast<std::size_t>(i)]) + 1;
    }
    if (box > static_cast<double>(opt.box_cap)) throw resource_error("dual_only_zero_solution: box cap exceeded");

    const auto xd = point_to_doubles(x);
    const auto delta = detail::repr_errors(x);
    std::vector<std::int64_t> a(static_cast<std::size_t>(n), 0);
    bool found = false;
    std::function<void(int)> rec = [&](int i) {
        if (found) return;
        if (i == n) {
            bool nz = false;
            double sd = 0, err = 0;
            for (int j = 0; j < n; ++j) {
                if (a[static_cast<std::size_t>(j)] != 0) nz = true;
                sd += static_cast<double>(a[static_cast<std::size_t>(j)]) * xd[static_cast<std::size_t>(j)];
                err += std::abs(static_cast<double>(a[static_cast<std::size_t>(j)])) * delta[static_cast<std::size_t>(j)];
            }
            if (!nz) return;
            err += 4 * (std::abs(sd) + 1) * 2.3e-16;
            const double dd = std::abs(sd - std::nearbyint(sd));
            if (dd - err >= bound) return; // certainly no a_0 works
            // exact decision
            bigq s(0);
            for (int j = 0; j < n; ++j)
                s += bigq(static_cast<long>(a[static_cast<std::size_t>(j)])) * x[static_cast<std::size_t>(j)];
            if (dist_to_int(s).get_d() < bound) found = true;
            return;
        }
        for (std::int64_t v = -amax[static_cast<std::size_t>(i)]; v <= amax[static_cast<std::size_t>(i)]; ++v) {
            a[static_cast<std::size_t>(i)] = v;
            rec(i + 1);
            if (found) return;
        }
    };
    rec(0);
    return !found;
}

// ---------------------------------------------------------------------------
// Orbit traces
// ---------------------------------------------------------------------------

enum class orbit_convention { a_V, d_U };

/// Embedding of the orbit lattice a_r(t) V(x) Z^{n+1} (or d_r(t) U(x) Z^{n+1})
/// that performs the unipotent cancellation in exact arithmetic before
/// applying the diagonal scaling.  Reduction transforms stay valid across t,
/// so traces warm-start each step from the previous coefficient basis.
class orbit_embedding {
public:
    orbit_embedding(const point& x, const weight& w, orbit_convention conv, double t)
        : x_(&x), w_(&w), conv_(conv), t_(t) {}

    int rank() const { return w_->n() + 1; }
    int ambient() const { return w_->n() + 1; }

    std::vector<double> embed(const int_vec& c) const {
        const int n = w_->n();
        std::vector<double> out(static_cast<std::size_t>(n + 1));
        if (conv_ == orbit_convention::a_V) {
            // c = (p_1..p_n, q): components e^{r_i t}(p_i + q x_i), e^{-t} q
            const std::int64_t q = c[static_cast<std::size_t>(n)];
            for (int i = 0; i < n; ++i) {
                bigq u = bigq(static_cast<long>(c[static_cast<std::size_t>(i)])) +
                         bigq(static_cast<long>(q)) * (*x_)[static_cast<std::size_t>(i)];
                out[static_cast<std::size_t>(i)] = std::exp((*w_)[i] * t_) * u.get_d();
            }
            out[static_cast<std::size_t>(n)] = std::exp(-t_) * static_cast<double>(q);
        } else {
            // c = (a_0, a_1..a_n): components e^{t}(a_0 + sum a_i x_i), e^{-r_i t} a_i
            bigq u(static_cast<long>(c[0]));
            for (int i = 0; i < n; ++i)
                u += bigq(static_cast<long>(c[static_cast<std::size_t>(i + 1)])) * (*x_)[static_cast<std::size_t>(i)];
            out[0] = std::exp(t_) * u.get_d();
            for (int i = 0; i < n; ++i)
                out[static_cast<std::size_t>(i + 1)] = std::exp(-(*w_)[i] * t_) * static_cast<double>(c[static_cast<std::size_t>(i + 1)]);
        }
        return out;
    }

private:
    const point* x_;
    const weight* w_;
    orbit_convention conv_;
    double t_;
};

struct orbit_trace_result {
    std::vector<double> times;
    std::vector<double> lambda1;
    std::vector<double> floor_so_far; ///< running certified floor
    double certified_floor = 0;
};

/// Sample lambda_1 along the orbit on a uniform grid and certify a lower
/// bound between samples via lambda_1(s) >= lambda_1(t) e^{-(1+r1)|s-t|}.
inline orbit_trace_result orbit_trace(const point& x, const weight& w, orbit_convention conv,
                                      double T, double step, enum_options opt = {}) {
    require(T > 0, "orbit_trace: T > 0 required");
    require(step > 0 && step <= 0.1, "orbit_trace: 0 < step <= 0.1 required");
    orbit_trace_result out;
    const double rate = 1.0 + w.r1();
    std::vector<int_vec> warm;
    double floor = -1;
    double prev_lambda = 0;
    const auto steps = static_cast<std::int64_t>(std::ceil(T / step - 1e-9));
    for (std::int64_t i = 0;; ++i) {
        const double t = (i >= steps) ? T : static_cast<double>(i) * step;
        orbit_embedding emb(x, w, conv, t);
        const auto sv = shortest_vector_emb(emb, opt, &warm);
        out.times.push_back(t);
        out.lambda1.push_back(sv.norm);
        if (out.times.size() >= 2) {
            // interval floor: crossing point of the two one-sided bounds
            double f = std::sqrt(prev_lambda * sv.norm) * std::exp(-rate * step / 2);
            f = std::min(f, std::min(prev_lambda, sv.norm));
            floor = floor < 0 ? f : std::min(floor, f);
        } else {
            floor = sv.norm;
        }
        out.floor_so_far.push_back(floor);
        prev_lambda = sv.norm;
        if (i >= steps) break;
    }
    out.certified_floor = floor;
    return out;
}

// ---------------------------------------------------------------------------
// Dynamical correspondence at finite scale
// ---------------------------------------------------------------------------

struct correspondence_report {
    double direct_constant = 0;
    double orbit_floor = 0;
    double T_used = 0;
    double threshold = 0;       ///< direct classification threshold Q^{-1/4}
    double threshold_orbit = 0; ///< orbit threshold Q^{-1/8} (dips scale like sqrt(c))
    bool direct_bad = false;
    bool orbit_bad = false;
    double implied_direct_lower = 0; ///< c * eps^{-1} from the proof chain
    std::string verdict;         ///< "consistent" | "inconclusive" | "violation"
};

/// Runs the direct test at horizon Q and the orbit up to
/// T = ln Q + ln(2 / direct constant) (clipped), then checks the finite-scale
/// transference: orbit floor >= c implies direct >= c * eps^{-1} with
/// eps = max_i (2/c)^{r_i}.  Verdicts within a factor-4 slack band are
/// "inconclusive" rather than failures.
inline correspondence_report correspondence_check(const point& x, const weight& w, std::int64_t Q,
                                                  double T_cap = 40.0, double step = 0.01,
                                                  enum_options opt = {}) {
    correspondence_report rep;
    const auto direct = badness_constant_direct(x, w, Q);
    rep.direct_constant = direct.constant;
    const double c_for_T = std::max(direct.constant, 1e-12);
    rep.T_used = std::min(std::log(static_cast<double>(Q)) + std::log(2.0 / c_for_T), T_cap);
    const auto trace = orbit_trace(x, w, orbit_convention::a_V, rep.T_used, step, opt);
    rep.orbit_floor = trace.certified_floor;

    rep.threshold = std::pow(static_cast<double>(Q), -0.25);
    rep.threshold_orbit = std::pow(static_cast<double>(Q), -0.125);
    rep.direct_bad = rep.direct_constant >= rep.threshold;
    rep.orbit_bad = rep.orbit_floor >= rep.threshold_orbit;

    if (rep.orbit_bad) {
        // the transference direction is live: orbit floor c forces
        // direct >= c / eps with eps = max_i (2/c)^{r_i}
        const double c = rep.orbit_floor;
        double eps = 0;
        for (int i = 0; i < w.n(); ++i) eps = std::max(eps, std::pow(2.0 / c, w[i]));
        rep.implied_direct_lower = c / eps;
        if (rep.direct_constant >= rep.implied_direct_lower)
            rep.verdict = "consistent";
        else if (rep.direct_constant >= rep.implied_direct_lower / 4.0)
            rep.verdict = "inconclusive";
        else
            rep.verdict = "violation";
    } else {
        // orbit escapes at this scale; nothing to transfer.  Disagreeing
        // classifications can only come from the horizon mismatch between Q
        // and e^T, so they are reported as inconclusive rather than failed.
        rep.implied_direct_lower = 0;
        rep.verdict = rep.direct_bad ? "inconclusive" : "consistent";
    }
    return rep;
}

} // namespace badflow
