#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <vector>

#include "badflow/core.hpp"
#include "badflow/exterior.hpp"
#include "badflow/intmat.hpp"
#include "badflow/linalg.hpp"

namespace badflow {

// ---------------------------------------------------------------------------
// Lattices under the sup norm.
//
// All enumeration runs in coefficient space: an "embedding" maps integer
// coefficient vectors to R^d, and reduction transforms are kept as exact
// integer matrices.  Columns are re-embedded from scratch after every integer
// update instead of being patched in floating point, so embeddings that carry
// exact cancellations (see diophantine.hpp) stay accurate along the way.
// ---------------------------------------------------------------------------

struct enum_options {
    std::int64_t node_cap = 50'000'000; ///< enumeration tree nodes before resource_error
    int lll_max_sweeps = 10'000;
    double delta = 0.99; ///< Lovasz constant
};

/// Generic embedding: columns of a real matrix.
class matrix_embedding {
public:
    explicit matrix_embedding(matrix<double> b) : b_(std::move(b)) {}
    int rank() const { return b_.cols(); }
    int ambient() const { return b_.rows(); }
    std::vector<double> embed(const int_vec& c) const {
        std::vector<double> out(static_cast<std::size_t>(b_.rows()), 0.0);
        for (int j = 0; j < b_.cols(); ++j) {
            const double cj = static_cast<double>(c[static_cast<std::size_t>(j)]);
            if (cj == 0.0) continue;
            for (int i = 0; i < b_.rows(); ++i) out[static_cast<std::size_t>(i)] += cj * b_(i, j);
        }
        return out;
    }

private:
    matrix<double> b_;
};

namespace detail {

inline std::int64_t checked_mul(std::int64_t a, std::int64_t b) {
    std::int64_t r;
    if (__builtin_mul_overflow(a, b, &r)) throw resource_error("integer coefficient overflow");
    return r;
}

inline void sub_scaled(int_vec& a, std::int64_t q, const int_vec& b) {
    for (std::size_t i = 0; i < a.size(); ++i) {
        std::int64_t t = checked_mul(q, b[i]);
        if (__builtin_sub_overflow(a[i], t, &a[i])) throw resource_error("integer coefficient overflow");
    }
}

/// Canonical sign: first nonzero coefficient positive.  Returns true if the
/// vector was negated.
inline bool canonicalize_sign(int_vec& c) {
    for (std::int64_t v : c) {
        if (v > 0) return false;
        if (v < 0) {
            for (auto& x : c) x = -x;
            return true;
        }
    }
    return false;
}

/// Tie-break order on sign-canonical coefficient vectors: prefer support on
/// earlier basis directions (compare magnitudes from the last coordinate
/// down), then signed lexicographic.  The Z^d witness comes out as the first
/// basis direction.
inline bool tie_prefer(const int_vec& a, const int_vec& b) {
    for (std::size_t i = a.size(); i-- > 0;) {
        const std::int64_t aa = a[i] < 0 ? -a[i] : a[i];
        const std::int64_t bb = b[i] < 0 ? -b[i] : b[i];
        if (aa != bb) return aa < bb;
    }
    return std::lexicographical_compare(b.begin(), b.end(), a.begin(), a.end());
}

} // namespace detail

/// LLL-reduced state of an embedded lattice: integer coefficient columns and
/// their embeddings.
template <typename Emb>
class reduced_lattice {
public:
    explicit reduced_lattice(const Emb& emb, enum_options opt = {}) : emb_(&emb), opt_(opt) {
        const int k = emb.rank();
        coeffs_.resize(static_cast<std::size_t>(k));
        for (int j = 0; j < k; ++j) {
            coeffs_[static_cast<std::size_t>(j)].assign(static_cast<std::size_t>(k), 0);
            coeffs_[static_cast<std::size_t>(j)][static_cast<std::size_t>(j)] = 1;
        }
        reembed_all();
        reduce();
    }

    /// Warm start from a previous coefficient basis (same rank).
    reduced_lattice(const Emb& emb, std::vector<int_vec> warm, enum_options opt = {})
        : emb_(&emb), opt_(opt), coeffs_(std::move(warm)) {
        reembed_all();
        reduce();
    }

    int rank() const { return static_cast<int>(coeffs_.size()); }
    const std::vector<int_vec>& coeffs() const { return coeffs_; }
    const std::vector<std::vector<double>>& embedded() const { return cols_; }

    /// Embedding of an arbitrary combination y of the *reduced* columns.
    int_vec original_coeffs(const int_vec& y) const {
        const int k = rank();
        int_vec c(static_cast<std::size_t>(k), 0);
        for (int j = 0; j < k; ++j) {
            if (y[static_cast<std::size_t>(j)] == 0) continue;
            for (int i = 0; i < k; ++i) {
                std::int64_t t = detail::checked_mul(y[static_cast<std::size_t>(j)], coeffs_[static_cast<std::size_t>(j)][static_cast<std::size_t>(i)]);
                if (__builtin_add_overflow(c[static_cast<std::size_t>(i)], t, &c[static_cast<std::size_t>(i)]))
                    throw resource_error("integer coefficient overflow");
            }
        }
        return c;
    }

    /// Visit every nonzero y in Z^k with ||embed(y)||_2 <= radius (y given in
    /// reduced-basis coordinates).  Counts enumeration nodes against the cap.
    template <typename F>
    void for_each_in_ball(double radius, F&& visit) const {
        const int k = rank();
        // Cholesky of the Gram matrix of the reduced columns
        matrix<double> g(k, k);
        for (int i = 0; i < k; ++i)
            for (int j = 0; j <= i; ++j) g(i, j) = g(j, i) = dot(cols_[static_cast<std::size_t>(i)], cols_[static_cast<std::size_t>(j)]);
        matrix<double> r(k, k); // upper triangular, ||R y||_2 = ||embed(y)||_2
        for (int i = 0; i < k; ++i) {
            for (int j = i; j < k; ++j) {
                double s = g(i, j);
                for (int t = 0; t < i; ++t) s -= r(t, i) * r(t, j);
                if (i == j) {
                    if (s <= 0) throw resource_error("degenerate lattice basis");
                    r(i, i) = std::sqrt(s);
                } else {
                    r(i, j) = s / r(i, i);
                }
            }
        }
        const double rad2 = radius * radius * (1.0 + 1e-9);
        int_vec y(static_cast<std::size_t>(k), 0);
        std::int64_t nodes = 0;
        std::function<void(int, double)> rec = [&](int level, double used) {
            if (level < 0) {
                bool nz = false;
                for (std::int64_t v : y)
                    if (v != 0) { nz = true; break; }
                if (nz) visit(static_cast<const int_vec&>(y));
                return;
            }
            double c = 0;
            for (int t = level + 1; t < k; ++t) c += r(level, t) * static_cast<double>(y[static_cast<std::size_t>(t)]);
            const double rr = r(level, level);
            const double room = std::sqrt(std::max(0.0, rad2 - used));
            const double lo = (-room - c) / rr, hi = (room - c) / rr;
            for (std::int64_t v = static_cast<std::int64_t>(std::ceil(lo - 1e-12));
                 v <= static_cast<std::int64_t>(std::floor(hi + 1e-12)); ++v) {
                if (++nodes > opt_.node_cap) throw resource_error("enumeration node cap exceeded");
                const double term = rr * static_cast<double>(v) + c;
                const double u2 = used + term * term;
                if (u2 > rad2 * (1.0 + 1e-12)) continue;
                y[static_cast<std::size_t>(level)] = v;
                rec(level - 1, u2);
            }
            y[static_cast<std::size_t>(level)] = 0;
        };
        rec(k - 1, 0.0);
    }

private:
    void reembed_all() {
        cols_.clear();
        for (const auto& c : coeffs_) cols_.push_back(emb_->embed(c));
    }

    void reduce() {
        const int k = rank();
        if (k <= 1) return;
        std::vector<std::vector<double>> bstar;
        std::vector<std::vector<double>> mu(static_cast<std::size_t>(k), std::vector<double>(static_cast<std::size_t>(k), 0.0));
        std::vector<double> bn(static_cast<std::size_t>(k), 0.0);
        auto gram_schmidt = [&]() {
            bstar.assign(static_cast<std::size_t>(k), {});
            for (int i = 0; i < k; ++i) {
                std::vector<double> v = cols_[static_cast<std::size_t>(i)];
                for (int j = 0; j < i; ++j) {
                    mu[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] =
                        bn[static_cast<std::size_t>(j)] > 0 ? dot(cols_[static_cast<std::size_t>(i)], bstar[static_cast<std::size_t>(j)]) / bn[static_cast<std::size_t>(j)] : 0.0;
                    const double m = mu[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
                    for (std::size_t t = 0; t < v.size(); ++t) v[t] -= m * bstar[static_cast<std::size_t>(j)][t];
                }
                bstar[static_cast<std::size_t>(i)] = v;
                bn[static_cast<std::size_t>(i)] = dot(v, v);
            }
        };
        gram_schmidt();
        int sweeps = 0;
        int i = 1;
        while (i < k) {
            if (++sweeps > opt_.lll_max_sweeps * k) break; // keep whatever reduction we have
            // size-reduce column i
            bool changed = false;
            for (int j = i - 1; j >= 0; --j) {
                const double m = mu[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
                if (std::abs(m) > 0.5 + 1e-12) {
                    const auto q = static_cast<std::int64_t>(std::llround(m));
                    detail::sub_scaled(coeffs_[static_cast<std::size_t>(i)], q, coeffs_[static_cast<std::size_t>(j)]);
                    cols_[static_cast<std::size_t>(i)] = emb_->embed(coeffs_[static_cast<std::size_t>(i)]);
                    changed = true;
                }
            }
            if (changed) gram_schmidt();
            const double lhs = bn[static_cast<std::size_t>(i)];
            const double m = mu[static_cast<std::size_t>(i)][static_cast<std::size_t>(i - 1)];
            if (lhs < (opt_.delta - m * m) * bn[static_cast<std::size_t>(i - 1)]) {
                std::swap(coeffs_[static_cast<std::size_t>(i)], coeffs_[static_cast<std::size_t>(i - 1)]);
                std::swap(cols_[static_cast<std::size_t>(i)], cols_[static_cast<std::size_t>(i - 1)]);
                gram_schmidt();
                i = std::max(1, i - 1);
            } else {
                ++i;
            }
        }
    }

    const Emb* emb_;
    enum_options opt_;
    std::vector<int_vec> coeffs_;
    std::vector<std::vector<double>> cols_;
};

struct svp_result {
    int_vec coeffs;              ///< canonical integer coefficients (original basis)
    std::vector<double> vec;     ///< embedded vector
    double norm = 0;             ///< sup norm
};

/// Shortest nonzero vector in the sup norm.  Deterministic tie-break: sign-
/// canonical coefficient vector (first nonzero positive), then the tie order
/// of detail::tie_prefer.
template <typename Emb>
svp_result shortest_vector_emb(const Emb& emb, enum_options opt = {},
                               std::vector<int_vec>* warm = nullptr) {
    reduced_lattice<Emb> red = warm && !warm->empty() ? reduced_lattice<Emb>(emb, *warm, opt)
                                                      : reduced_lattice<Emb>(emb, opt);
    if (warm) *warm = red.coeffs();
    const int k = red.rank();
    double best = -1;
    for (int j = 0; j < k; ++j) best = best < 0 ? sup_norm(red.embedded()[static_cast<std::size_t>(j)])
                                                : std::min(best, sup_norm(red.embedded()[static_cast<std::size_t>(j)]));
    const int d = emb.ambient();
    const double radius = std::sqrt(static_cast<double>(d)) * best * (1.0 + 1e-9);
    svp_result out;
    out.norm = -1;
    red.for_each_in_ball(radius, [&](const int_vec& y) {
        int_vec c = red.original_coeffs(y);
        detail::canonicalize_sign(c);
        const auto v = emb.embed(c);
        const double n = sup_norm(v);
        if (out.norm < 0 || n < out.norm * (1.0 - 1e-15) ||
            (std::abs(n - out.norm) <= out.norm * 1e-15 && detail::tie_prefer(c, out.coeffs))) {
            out.coeffs = c;
            out.vec = v;
            out.norm = n;
        }
    });
    if (out.norm < 0) throw resource_error("shortest_vector: empty enumeration");
    return out;
}

struct minima_profile {
    std::vector<double> minima;
    std::vector<int_vec> witness_coeffs;
    std::vector<std::vector<double>> witnesses;
};

namespace detail {

/// Exact rank over Q of integer vectors (fraction-free elimination).
inline int integer_rank(std::vector<std::vector<bigz>> rows) {
    int rank = 0;
    const int nr = static_cast<int>(rows.size());
    const int nc = nr ? static_cast<int>(rows[0].size()) : 0;
    int col = 0;
    for (int r = 0; r < nr && col < nc; ++col) {
        int piv = -1;
        for (int i = r; i < nr; ++i)
            if (rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(col)] != 0) { piv = i; break; }
        if (piv < 0) continue;
        std::swap(rows[static_cast<std::size_t>(r)], rows[static_cast<std::size_t>(piv)]);
        for (int i = r + 1; i < nr; ++i) {
            const bigz a = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(col)];
            if (a == 0) continue;
            const bigz p = rows[static_cast<std::size_t>(r)][static_cast<std::size_t>(col)];
            for (int j = col; j < nc; ++j)
                rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] =
                    rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] * p - rows[static_cast<std::size_t>(r)][static_cast<std::size_t>(j)] * a;
        }
        ++r;
        ++rank;
    }
    return rank;
}

inline std::vector<bigz> to_bigz(const int_vec& v) {
    std::vector<bigz> out;
    out.reserve(v.size());
    for (auto x : v) out.emplace_back(static_cast<long>(x));
    return out;
}

} // namespace detail

/// Successive minima with witnesses, by exhaustive enumeration inside a
/// certified ball followed by the greedy independent selection (which attains
/// the minima exactly).
template <typename Emb>
minima_profile successive_minima_emb(const Emb& emb, enum_options opt = {}) {
    reduced_lattice<Emb> red(emb, opt);
    const int k = red.rank();
    double radius_sup = 0;
    for (int j = 0; j < k; ++j) radius_sup = std::max(radius_sup, sup_norm(red.embedded()[static_cast<std::size_t>(j)]));
    const int d = emb.ambient();
    const double radius = std::sqrt(static_cast<double>(d)) * radius_sup * (1.0 + 1e-9);

    struct cand {
        int_vec c;
        std::vector<double> v;
        double n;
    };
    std::map<int_vec, cand> seen;
    red.for_each_in_ball(radius, [&](const int_vec& y) {
        int_vec c = red.original_coeffs(y);
        detail::canonicalize_sign(c);
        if (seen.count(c)) return;
        auto v = emb.embed(c);
        seen.emplace(c, cand{c, v, sup_norm(v)});
    });
    std::vector<cand> all;
    all.reserve(seen.size());
    for (auto& [key, val] : seen) all.push_back(std::move(val));
    std::sort(all.begin(), all.end(), [](const cand& a, const cand& b) {
        if (a.n != b.n) return a.n < b.n;
        return detail::tie_prefer(a.c, b.c);
    });

    minima_profile out;
    std::vector<std::vector<bigz>> chosen;
    for (const auto& c : all) {
        if (static_cast<int>(out.minima.size()) == k) break;
        chosen.push_back(detail::to_bigz(c.c));
        if (detail::integer_rank(chosen) == static_cast<int>(chosen.size())) {
            out.minima.push_back(c.n);
            out.witness_coeffs.push_back(c.c);
            out.witnesses.push_back(c.v);
        } else {
            chosen.pop_back();
        }
    }
    if (static_cast<int>(out.minima.size()) != k)
        throw resource_error("successive_minima: enumeration ball missed independent vectors");
    return out;
}

// ---------------------------------------------------------------------------
// Concrete lattice types
// ---------------------------------------------------------------------------

/// Full-rank lattice given by basis columns.
struct lattice_basis {
    matrix<double> basis;
    bool unimodular = false;

    lattice_basis() = default;
    explicit lattice_basis(matrix<double> b, bool uni = false, double uni_tol = 1e-9)
        : basis(std::move(b)), unimodular(uni) {
        require(basis.rows() == basis.cols(), "lattice_basis: square matrix required");
        const double det = determinant(basis);
        require(std::abs(det) > 1e-12, "lattice_basis: columns not independent");
        if (uni) require(std::abs(std::abs(det) - 1.0) <= uni_tol, "lattice_basis: not unimodular");
    }

    int dim() const { return basis.rows(); }
};

/// k generators inside an ambient lattice, as integer coefficient columns.
struct sublattice {
    std::vector<int_vec> vectors;
    int k() const { return static_cast<int>(vectors.size()); }
};

inline svp_result shortest_vector(const lattice_basis& l, enum_options opt = {}) {
    matrix_embedding emb(l.basis);
    return shortest_vector_emb(emb, opt);
}

inline minima_profile successive_minima(const lattice_basis& l, enum_options opt = {}) {
    matrix_embedding emb(l.basis);
    return successive_minima_emb(emb, opt);
}

/// Minima of a sublattice inside l (embedded vectors B*S, coefficients in the
/// sublattice generators).
inline minima_profile successive_minima(const lattice_basis& l, const sublattice& s, enum_options opt = {}) {
    const int d = l.dim(), k = s.k();
    matrix<double> cols(d, k);
    for (int j = 0; j < k; ++j) {
        int_vec c = s.vectors[static_cast<std::size_t>(j)];
        matrix_embedding amb(l.basis);
        cols.set_column(j, amb.embed(c));
    }
    matrix_embedding emb(cols);
    return successive_minima_emb(emb, opt);
}

/// Lattice membership of the closed-ball compactness family: true iff the
/// shortest vector is strictly longer than eps (a vector of norm exactly eps
/// lies in the closed ball, so the lattice is *not* in K_eps).
inline bool in_k_eps(const lattice_basis& l, double eps, enum_options opt = {}) {
    require(eps > 0, "in_k_eps: eps must be positive");
    return shortest_vector(l, opt).norm > eps;
}

/// LLL (delta = 0.99) followed by greedy sup-norm size reduction and a
/// deterministic column normalization.  Guarantee documented as
/// ||v_j|| <= 2^(n+1) * lambda_j; the tests check it against the enumerated
/// minima.
inline lattice_basis reduced_basis(const lattice_basis& l, enum_options opt = {}) {
    matrix_embedding emb(l.basis);
    reduced_lattice<matrix_embedding> red(emb, opt);
    std::vector<int_vec> cs = red.coeffs();
    const int d = l.dim();
    std::vector<std::vector<double>> cols;
    for (auto& c : cs) cols.push_back(emb.embed(c));
    // greedy pairwise sup-norm reduction
    bool improved = true;
    int passes = 0;
    while (improved && passes++ < 64) {
        improved = false;
        for (int i = 0; i < d; ++i)
            for (int j = 0; j < d; ++j) {
                if (i == j) continue;
                for (std::int64_t q : {std::int64_t(1), std::int64_t(-1), std::int64_t(2), std::int64_t(-2)}) {
                    int_vec trial = cs[static_cast<std::size_t>(i)];
                    detail::sub_scaled(trial, q, cs[static_cast<std::size_t>(j)]);
                    auto tv = emb.embed(trial);
                    if (sup_norm(tv) < sup_norm(cols[static_cast<std::size_t>(i)]) * (1.0 - 1e-12)) {
                        cs[static_cast<std::size_t>(i)] = trial;
                        cols[static_cast<std::size_t>(i)] = tv;
                        improved = true;
                    }
                }
            }
    }
    // normalize: sign-canonical coefficients, columns sorted by sup norm
    std::vector<int> order(static_cast<std::size_t>(d));
    for (int i = 0; i < d; ++i) order[static_cast<std::size_t>(i)] = i;
    for (auto& c : cs) detail::canonicalize_sign(c);
    for (int i = 0; i < d; ++i) cols[static_cast<std::size_t>(i)] = emb.embed(cs[static_cast<std::size_t>(i)]);
    std::sort(order.begin(), order.end(), [&](int a, int b) {
        const double na = sup_norm(cols[static_cast<std::size_t>(a)]);
        const double nb = sup_norm(cols[static_cast<std::size_t>(b)]);
        if (na != nb) return na < nb;
        return detail::tie_prefer(cs[static_cast<std::size_t>(a)], cs[static_cast<std::size_t>(b)]);
    });
    matrix<double> out(d, d);
    for (int j = 0; j < d; ++j) out.set_column(j, cols[static_cast<std::size_t>(order[static_cast<std::size_t>(j)])]);
    return lattice_basis(out, l.unimodular);
}

/// Covolume proxy d(S) = sup-norm of the wedge of the embedded generators.
/// Exact when the basis scalar type is exact.
template <typename T>
T sublattice_covolume_t(const matrix<T>& basis, const sublattice& s) {
    const int d = basis.rows(), k = s.k();
    matrix<T> cols(d, k);
    for (int j = 0; j < k; ++j)
        for (int i = 0; i < d; ++i) {
            T acc(0);
            for (int t = 0; t < d; ++t) acc += basis(i, t) * T(static_cast<double>(s.vectors[static_cast<std::size_t>(j)][static_cast<std::size_t>(t)]));
            cols(i, j) = acc;
        }
    return sup_norm(wedge_columns(cols));
}

inline double sublattice_covolume(const lattice_basis& l, const sublattice& s) {
    return sublattice_covolume_t(l.basis, s);
}

/// Primitive iff all elementary divisors of the coefficient matrix are 1.
inline bool is_primitive(const sublattice& s, const lattice_basis& l) {
    const int d = l.dim();
    return is_unimodular_span(to_int_matrix(s.vectors, d), s.k());
}

struct sublattice_enum_options {
    std::int64_t result_cap = 1'000'000;
    std::int64_t vector_cap = 2'000'000;
    enum_options enum_opts{};
};

/// All primitive k-dimensional sublattices with covolume <= rho, one HNF
/// representative each, exhaustive.  Generator search radius comes from the
/// LLL bound: a reduced basis of any qualifying sublattice has
/// prod ||b_i||_2 <= 2^{k(k-1)/4} * sqrt(C(d,k)) * rho, each factor >= lambda1.
inline std::vector<sublattice> enumerate_primitive_sublattices(const lattice_basis& l, int k, double rho,
                                                               sublattice_enum_options opt = {}) {
    const int d = l.dim();
    require(k >= 1 && k <= d, "enumerate_primitive_sublattices: bad k");
    require(rho > 0, "enumerate_primitive_sublattices: rho must be positive");
    const double lam1 = shortest_vector(l, opt.enum_opts).norm;
    require(lam1 > 0, "enumerate_primitive_sublattices: degenerate lattice");

    const double head = std::pow(2.0, 0.25 * k * (k - 1)) * std::sqrt(static_cast<double>(binomial(d, k)));
    const double prod_bound = head * rho * (1.0 + 1e-9);
    const double vec_bound = (k == 1) ? rho * (1.0 + 1e-9)
                                      : prod_bound / std::pow(lam1, k - 1);

    matrix_embedding emb(l.basis);
    reduced_lattice<matrix_embedding> red(emb, opt.enum_opts);

    struct cand {
        int_vec c;
        std::vector<double> v;
        double n;
    };
    std::map<int_vec, cand> seen;
    red.for_each_in_ball(std::sqrt(static_cast<double>(d)) * vec_bound, [&](const int_vec& y) {
        int_vec c = red.original_coeffs(y);
        detail::canonicalize_sign(c);
        if (seen.count(c)) return;
        auto v = emb.embed(c);
        const double n = sup_norm(v);
        if (n <= vec_bound) seen.emplace(c, cand{c, v, n});
        if (static_cast<std::int64_t>(seen.size()) > opt.vector_cap)
            throw resource_error("enumerate_primitive_sublattices: vector cap exceeded");
    });
    std::vector<cand> vecs;
    vecs.reserve(seen.size());
    for (auto& [key, val] : seen) vecs.push_back(std::move(val));
    std::sort(vecs.begin(), vecs.end(), [](const cand& a, const cand& b) {
        if (a.n != b.n) return a.n < b.n;
        return detail::tie_prefer(a.c, b.c);
    });

    std::map<std::vector<std::int64_t>, sublattice> found; // key: flattened HNF
    std::vector<int> pick;
    std::function<void(int, double)> rec = [&](int start, double prod) {
        if (static_cast<int>(pick.size()) == k) {
            std::vector<int_vec> gens;
            gens.reserve(static_cast<std::size_t>(k));
            for (int idx : pick) gens.push_back(vecs[static_cast<std::size_t>(idx)].c);
            auto im = to_int_matrix(gens, d);
            // independence, covolume, primitivity
            if (detail::integer_rank(im) != k) return;
            sublattice s{gens};
            if (sublattice_covolume(l, s) > rho * (1.0 + 1e-9)) return;
            if (!is_unimodular_span(im, k)) return;
            auto h = hermite_normal_form(im);
            std::vector<std::int64_t> key;
            key.reserve(static_cast<std::size_t>(d * k));
            for (const auto& row : h)
                for (const auto& x : row) {
                    if (!x.fits_slong_p()) throw resource_error("sublattice HNF entry overflow");
                    key.push_back(x.get_si());
                }
            if (!found.count(key)) {
                std::vector<int_vec> cols(static_cast<std::size_t>(k), int_vec(static_cast<std::size_t>(d), 0));
                for (int j = 0; j < k; ++j)
                    for (int i = 0; i < d; ++i) cols[static_cast<std::size_t>(j)][static_cast<std::size_t>(i)] = key[static_cast<std::size_t>(i * k + j)];
                found.emplace(std::move(key), sublattice{cols});
                if (static_cast<std::int64_t>(found.size()) > opt.result_cap)
                    throw resource_error("enumerate_primitive_sublattices: result cap exceeded");
            }
            return;
        }
        const int remaining = k - static_cast<int>(pick.size());
        for (int i = start; i < static_cast<int>(vecs.size()); ++i) {
            const double p = prod * vecs[static_cast<std::size_t>(i)].n;
            if (p * std::pow(lam1, remaining - 1) > prod_bound) break; // sorted by norm
            pick.push_back(i);
            rec(i + 1, p);
            pick.pop_back();
        }
    };
    rec(0, 1.0);

    std::vector<sublattice> out;
    out.reserve(found.size());
    for (auto& [key, val] : found) out.push_back(std::move(val));
    return out;
}

} // namespace badflow
