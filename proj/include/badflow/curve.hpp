#pragma once

#include <cmath>
#include <functional>
#include <optional>
#include <vector>

#include "badflow/core.hpp"
#include "badflow/rational.hpp"

namespace badflow {

/// Analytic nondegenerate curve phi: [a,b] -> R^n with componentwise first-
/// derivative bounds c1 <= |phi_i'| <= C1 and a second-derivative bound for
/// certified linearization.  Curves are supplied as closures; presets may also
/// carry an exact-rational evaluator for oracle paths.
struct curve {
    int n = 1;
    double a = 0, b = 1;
    std::function<std::vector<double>(double)> eval;
    std::function<std::vector<double>(double)> deriv;
    double deriv2_bound = 0;
    double c1 = 0, C1 = 0;
    std::function<point(const bigq&)> exact_eval; ///< optional

    double length() const { return b - a; }
};

/// The moment curve s -> (s, s^2, ..., s^n) on [0.5, 1.5]; the standard
/// nondegenerate witness.  Derivative bounds are exact on this domain.
inline curve moment_curve(int n) {
    require(n >= 1, "moment_curve: n >= 1");
    curve c;
    c.n = n;
    c.a = 0.5;
    c.b = 1.5;
    c.eval = [n](double s) {
        std::vector<double> out(static_cast<std::size_t>(n));
        double p = 1;
        for (int i = 0; i < n; ++i) out[static_cast<std::size_t>(i)] = (p *= s);
        return out;
    };
    c.deriv = [n](double s) {
        std::vector<double> out(static_cast<std::size_t>(n));
        double p = 1;
        for (int i = 0; i < n; ++i) {
            out[static_cast<std::size_t>(i)] = (i + 1) * p;
            p *= s;
        }
        return out;
    };
    c.exact_eval = [n](const bigq& s) {
        point out;
        out.reserve(static_cast<std::size_t>(n));
        bigq p(1);
        for (int i = 0; i < n; ++i) {
            p *= s;
            out.push_back(p);
        }
        return out;
    };
    // |phi_i'(s)| = i s^{i-1}: monotone on [0.5, 1.5]
    c.c1 = 1.0;
    c.C1 = 1.0;
    for (int i = 1; i <= n; ++i) {
        c.c1 = std::min(c.c1, i * std::pow(0.5, i - 1));
        c.C1 = std::max(c.C1, i * std::pow(1.5, i - 1));
    }
    // |phi_i''(s)| = i(i-1) s^{i-2}, max at s = 1.5
    c.deriv2_bound = 0.0;
    for (int i = 2; i <= n; ++i)
        c.deriv2_bound = std::max(c.deriv2_bound, i * (i - 1) * std::pow(1.5, i - 2));
    return c;
}

struct a2_report {
    double c1_measured = 0;
    double C1_measured = 0;
    bool pass = false;
};

/// Grid check of the derivative-bound assumption, widened first-order by
/// deriv2_bound * spacing so the verdict covers the whole domain.
inline a2_report check_a2(const curve& c, int grid) {
    require(grid >= 2, "check_a2: grid >= 2");
    const double h = c.length() / (grid - 1);
    a2_report rep;
    rep.c1_measured = std::numeric_limits<double>::infinity();
    rep.C1_measured = 0;
    for (int g = 0; g < grid; ++g) {
        const auto d = c.deriv(c.a + g * h);
        for (double v : d) {
            rep.c1_measured = std::min(rep.c1_measured, std::abs(v));
            rep.C1_measured = std::max(rep.C1_measured, std::abs(v));
        }
    }
    const double widen = c.deriv2_bound * h;
    rep.pass = rep.c1_measured - widen > 0.0;
    return rep;
}

/// ||phi(x+h) - phi(x) - h phi'(x)||, guaranteed <= deriv2_bound * h^2 / 2.
inline double taylor_linearization_error(const curve& c, double x, double h) {
    require(x >= c.a - 1e-12 && x + h <= c.b + 1e-12, "taylor_linearization_error: outside domain");
    const auto f0 = c.eval(x);
    const auto f1 = c.eval(x + h);
    const auto d = c.deriv(x);
    double err = 0;
    for (std::size_t i = 0; i < f0.size(); ++i)
        err = std::max(err, std::abs(f1[i] - f0[i] - h * d[i]));
    return err;
}

/// Affine reparametrization onto [0, 1].  The image set is unchanged; all
/// derivative data rescales by the domain length.
inline curve reparametrize_unit(const curve& c) {
    curve out = c;
    const double len = c.length();
    out.a = 0;
    out.b = 1;
    out.eval = [c](double u) { return c.eval(c.a + u * (c.b - c.a)); };
    out.deriv = [c, len](double u) {
        auto d = c.deriv(c.a + u * len);
        for (double& v : d) v *= len;
        return d;
    };
    if (c.exact_eval) {
        out.exact_eval = [c](const bigq& u) {
            const bigq s = exact(c.a) + u * exact(c.b - c.a);
            return c.exact_eval(s);
        };
    }
    out.c1 = c.c1 * len;
    out.C1 = c.C1 * len;
    out.deriv2_bound = c.deriv2_bound * len * len;
    return out;
}

} // namespace badflow
