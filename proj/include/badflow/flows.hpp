#pragma once

#include <cmath>
#include <vector>

#include "badflow/core.hpp"
#include "badflow/linalg.hpp"

namespace badflow {

using square_matrix = matrix<double>;

/// Probability vector of flow exponents.  The interval-construction modules
/// additionally require it sorted nonincreasing with a positive last entry;
/// plain flow constructors accept any order.
class weight {
public:
    explicit weight(std::vector<double> r) : r_(std::move(r)) {
        require(!r_.empty(), "weight: empty");
        double s = 0;
        for (double x : r_) {
            require(x >= 0.0, "weight: negative entry");
            s += x;
        }
        require(std::abs(s - 1.0) <= 1e-12, "weight: entries must sum to 1");
    }

    int n() const { return static_cast<int>(r_.size()); }
    double operator[](int i) const { return r_[static_cast<std::size_t>(i)]; }
    const std::vector<double>& entries() const { return r_; }
    double r1() const {
        double m = r_[0];
        for (double x : r_) m = std::max(m, x);
        return m;
    }

    bool sorted_positive() const {
        for (std::size_t i = 1; i < r_.size(); ++i)
            if (r_[i] > r_[i - 1]) return false;
        return r_.back() > 0.0;
    }

private:
    std::vector<double> r_;
};

/// Fixed notation of the subdivision construction: R, m, kappa = R^-m,
/// b solving b^(1+r1) = R, and lambda_i = (1+r_i)/(1+r1).
struct flow_params {
    int R = 2;
    int m = 1;
    double b = 0;
    double ln_b = 0;
    double kappa = 0;
    std::vector<double> lambda;

    flow_params() = default;
    flow_params(const weight& w, int R_, int m_) : R(R_), m(m_) {
        require(R >= 2, "flow_params: R >= 2 required");
        require(m >= 1, "flow_params: m >= 1 required");
        const double r1 = w[0];
        require(w.sorted_positive() || true, "unreachable");
        ln_b = std::log(static_cast<double>(R)) / (1.0 + r1);
        b = std::exp(ln_b);
        kappa = std::pow(static_cast<double>(R), -static_cast<double>(m));
        lambda.resize(static_cast<std::size_t>(w.n()));
        for (int i = 0; i < w.n(); ++i) lambda[static_cast<std::size_t>(i)] = (1.0 + w[i]) / (1.0 + r1);
    }

    /// b^e computed via exp(e ln b) so all modules round identically.
    double bpow(double e) const { return std::exp(e * ln_b); }
};

/// a_r(t) = diag(e^{r1 t}, ..., e^{rn t}, e^{-t});  determinant 1.
inline square_matrix flow_a(const weight& w, double t) {
    const int n = w.n();
    std::vector<double> d(static_cast<std::size_t>(n + 1));
    for (int i = 0; i < n; ++i) d[static_cast<std::size_t>(i)] = std::exp(w[i] * t);
    d[static_cast<std::size_t>(n)] = std::exp(-t);
    return square_matrix::diagonal(d);
}

/// d_r(t) = diag(e^{t}, e^{-r1 t}, ..., e^{-rn t});  dual exponent pattern.
inline square_matrix flow_d(const weight& w, double t) {
    const int n = w.n();
    std::vector<double> d(static_cast<std::size_t>(n + 1));
    d[0] = std::exp(t);
    for (int i = 0; i < n; ++i) d[static_cast<std::size_t>(i + 1)] = std::exp(-w[i] * t);
    return square_matrix::diagonal(d);
}

/// g_r(q) = diag(b^q, b^{-r1 q}, ..., b^{-rn q}), base-b variant of d_r.
inline square_matrix flow_g(const flow_params& p, const weight& w, double q) {
    const int n = w.n();
    std::vector<double> d(static_cast<std::size_t>(n + 1));
    d[0] = p.bpow(q);
    for (int i = 0; i < n; ++i) d[static_cast<std::size_t>(i + 1)] = p.bpow(-w[i] * q);
    return square_matrix::diagonal(d);
}

/// Generic auxiliary diagonal flow diag(b^{e_i t}); exponents must sum to 0.
inline square_matrix aux_flow(const flow_params& p, const std::vector<double>& exponents, double t) {
    double s = 0;
    for (double e : exponents) s += e;
    require(std::abs(s) <= 1e-12, "aux_flow: exponents must sum to 0");
    std::vector<double> d(exponents.size());
    for (std::size_t i = 0; i < exponents.size(); ++i) d[i] = p.bpow(exponents[i] * t);
    return square_matrix::diagonal(d);
}

/// Exponents of g^eta(t) = diag(b^{-eta t}, b^{eta t / n} I_n).
inline std::vector<double> aux_exponents_g_eta(int n, double eta) {
    std::vector<double> e(static_cast<std::size_t>(n + 1), eta / n);
    e[0] = -eta;
    return e;
}

/// Exponents of xi(t): contracts w+ by beta = sum_{j>=n1} r_j, fixes
/// w_1..w_{n1-1}, expands w_j by r_j for j >= n1.  n1 is 1-based.
inline std::vector<double> aux_exponents_xi(const weight& w, int n1) {
    const int n = w.n();
    require(n1 >= 1 && n1 <= n, "aux_exponents_xi: bad split index");
    std::vector<double> e(static_cast<std::size_t>(n + 1), 0.0);
    double beta = 0;
    for (int j = n1; j <= n; ++j) beta += w[j - 1];
    e[0] = -beta;
    for (int j = n1; j <= n; ++j) e[static_cast<std::size_t>(j)] = w[j - 1];
    return e;
}

/// Exponents of g'(t) = xi(t) g_r(t): expands w+ by chi = sum_{j<n1} r_j,
/// contracts w_1..w_{n1-1}, fixes the rest.
inline std::vector<double> aux_exponents_g_prime(const weight& w, int n1) {
    const int n = w.n();
    require(n1 >= 1 && n1 <= n, "aux_exponents_g_prime: bad split index");
    std::vector<double> e(static_cast<std::size_t>(n + 1), 0.0);
    double chi = 0;
    for (int j = 1; j < n1; ++j) chi += w[j - 1];
    e[0] = chi;
    for (int j = 1; j < n1; ++j) e[static_cast<std::size_t>(j)] = -w[j - 1];
    return e;
}

/// U(x) = [[1, x^T], [0, I_n]]; row unipotent, U(x)U(y) = U(x+y).
inline square_matrix unipotent_u(const std::vector<double>& x) {
    const int n = static_cast<int>(x.size());
    square_matrix m = square_matrix::identity(n + 1);
    for (int i = 0; i < n; ++i) m(0, i + 1) = x[static_cast<std::size_t>(i)];
    return m;
}

/// V(x) = [[I_n, x], [0, 1]]; column unipotent, additive in x.
inline square_matrix unipotent_v(const std::vector<double>& x) {
    const int n = static_cast<int>(x.size());
    square_matrix m = square_matrix::identity(n + 1);
    for (int i = 0; i < n; ++i) m(i, n) = x[static_cast<std::size_t>(i)];
    return m;
}

/// z(k) = diag(1, k) with k in SO(n) mapping e1 to x/|x|_2.  The remaining
/// columns are completed deterministically by Gram-Schmidt against the
/// standard basis, skipping candidates within 1e-6 of the current span.
inline square_matrix rotation_frame(const std::vector<double>& x) {
    const int n = static_cast<int>(x.size());
    const double nx = euclid_norm(x);
    require(nx > 0.0, "rotation_frame: zero direction");
    std::vector<std::vector<double>> cols;
    std::vector<double> first(x);
    for (double& c : first) c /= nx;
    cols.push_back(first);
    for (int cand = 0; cand < n && static_cast<int>(cols.size()) < n; ++cand) {
        std::vector<double> v(static_cast<std::size_t>(n), 0.0);
        v[static_cast<std::size_t>(cand)] = 1.0;
        for (const auto& c : cols) {
            const double d = dot(v, c);
            for (int i = 0; i < n; ++i) v[static_cast<std::size_t>(i)] -= d * c[static_cast<std::size_t>(i)];
        }
        const double nv = euclid_norm(v);
        if (nv <= 1e-6) continue; // near-parallel candidate
        for (double& c : v) c /= nv;
        cols.push_back(v);
    }
    require(static_cast<int>(cols.size()) == n, "rotation_frame: completion failed");
    // fix orientation so det(k) = +1
    matrix<double> k(n, n);
    for (int j = 0; j < n; ++j) k.set_column(j, cols[static_cast<std::size_t>(j)]);
    if (determinant(k) < 0)
        for (int i = 0; i < n; ++i) k(i, n - 1) = -k(i, n - 1);
    square_matrix z = square_matrix::identity(n + 1);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) z(i + 1, j + 1) = k(i, j);
    return z;
}

/// Coefficient form of g_r(t) U(y) g_r(-t) = U(y') with y'_i = b^{(1+r_i)t} y_i.
inline std::vector<double> conjugate_unipotent_by_flow(const flow_params& p, const weight& w,
                                                       double t, const std::vector<double>& y) {
    require(static_cast<int>(y.size()) == w.n(), "conjugate_unipotent_by_flow: dimension mismatch");
    std::vector<double> out(y.size());
    for (int i = 0; i < w.n(); ++i)
        out[static_cast<std::size_t>(i)] = p.bpow((1.0 + w[i]) * t) * y[static_cast<std::size_t>(i)];
    return out;
}

} // namespace badflow
