#pragma once

#include <vector>

#include "badflow/core.hpp"
#include "badflow/linalg.hpp"

namespace badflow {

// ---------------------------------------------------------------------------
// Exterior algebra over R^d with the supremum norm.
//
// Basis convention: index 0 is the distinguished first coordinate w+ and
// indices 1..d-1 span the complement W.  Components of a grade-k element are
// stored densely, indexed by the lexicographic rank of the increasing index
// subset.  Grade 0 (scalars) is allowed so that splitting off w+ stays total.
// ---------------------------------------------------------------------------

template <typename T>
class multivector_t {
public:
    multivector_t() = default;
    multivector_t(int dim, int grade)
        : dim_(dim), grade_(grade),
          comps_(static_cast<std::size_t>(binomial(dim, grade)), T(0)) {
        require(dim >= 1 && grade >= 0 && grade <= dim, "multivector: bad grade");
    }

    /// Basis vector e_i (grade 1).
    static multivector_t basis_vector(int dim, int i) {
        multivector_t v(dim, 1);
        v.comps_[static_cast<std::size_t>(i)] = T(1);
        return v;
    }

    /// Basis blade e_S for an increasing index subset S.
    static multivector_t basis_blade(int dim, const index_subset& s) {
        multivector_t v(dim, static_cast<int>(s.size()));
        v.comps_[static_cast<std::size_t>(subset_rank(s, dim))] = T(1);
        return v;
    }

    static multivector_t from_coords(int dim, const std::vector<T>& coords) {
        multivector_t v(dim, 1);
        v.comps_ = coords;
        return v;
    }

    int dim() const { return dim_; }
    int grade() const { return grade_; }
    std::int64_t size() const { return static_cast<std::int64_t>(comps_.size()); }

    T& operator[](std::int64_t rank) { return comps_[static_cast<std::size_t>(rank)]; }
    const T& operator[](std::int64_t rank) const { return comps_[static_cast<std::size_t>(rank)]; }

    T coeff(const index_subset& s) const { return comps_[static_cast<std::size_t>(subset_rank(s, dim_))]; }
    void set_coeff(const index_subset& s, const T& v) { comps_[static_cast<std::size_t>(subset_rank(s, dim_))] = v; }

    const std::vector<T>& components() const { return comps_; }

    multivector_t& operator+=(const multivector_t& o) {
        require(dim_ == o.dim_ && grade_ == o.grade_, "multivector: grade mismatch");
        for (std::size_t i = 0; i < comps_.size(); ++i) comps_[i] += o.comps_[i];
        return *this;
    }

    friend multivector_t operator+(multivector_t a, const multivector_t& b) { return a += b; }

    friend multivector_t operator*(const T& c, multivector_t v) {
        for (auto& x : v.comps_) x *= c;
        return v;
    }

    friend multivector_t operator-(multivector_t a, const multivector_t& b) {
        require(a.dim_ == b.dim_ && a.grade_ == b.grade_, "multivector: grade mismatch");
        for (std::size_t i = 0; i < a.comps_.size(); ++i) a.comps_[i] -= b.comps_[i];
        return a;
    }

    bool operator==(const multivector_t& o) const {
        return dim_ == o.dim_ && grade_ == o.grade_ && comps_ == o.comps_;
    }

private:
    int dim_ = 1, grade_ = 0;
    std::vector<T> comps_{T(0)};
};

using multivector = multivector_t<double>;

/// Wedge product.  Bilinear, alternating; component signs come from the
/// shuffle permutation merging the two index subsets.
template <typename T>
multivector_t<T> wedge(const multivector_t<T>& u, const multivector_t<T>& v) {
    require(u.dim() == v.dim(), "wedge: dimension mismatch");
    const int d = u.dim();
    require(u.grade() + v.grade() <= d, "wedge: grade overflow");
    multivector_t<T> out(d, u.grade() + v.grade());
    const auto su = all_subsets(d, u.grade());
    const auto sv = all_subsets(d, v.grade());
    index_subset merged;
    for (std::size_t a = 0; a < su.size(); ++a) {
        const T& ua = u[static_cast<std::int64_t>(a)];
        if (ua == T(0)) continue;
        for (std::size_t b = 0; b < sv.size(); ++b) {
            const T& vb = v[static_cast<std::int64_t>(b)];
            if (vb == T(0)) continue;
            const int sign = merge_subsets(su[a], sv[b], merged);
            if (sign == 0) continue;
            const auto r = subset_rank(merged, d);
            if (sign > 0)
                out[r] += ua * vb;
            else
                out[r] -= ua * vb;
        }
    }
    return out;
}

/// Wedge of the grade-1 columns of a d x k matrix (Pluecker coordinates of the
/// column span, scaled by the basis choice).
template <typename T>
multivector_t<T> wedge_columns(const matrix<T>& m) {
    const int d = m.rows(), k = m.cols();
    multivector_t<T> out(d, k);
    const auto rows = all_subsets(d, k);
    index_subset cols(static_cast<std::size_t>(k));
    for (int j = 0; j < k; ++j) cols[static_cast<std::size_t>(j)] = j;
    for (std::size_t r = 0; r < rows.size(); ++r)
        out[static_cast<std::int64_t>(r)] = minor_det(m, rows[r], cols);
    return out;
}

/// Canonical action of g on grade-k multivectors: g(v1 ^ ... ^ vk) =
/// (g v1) ^ ... ^ (g vk), extended linearly.  Computed through the k-th
/// compound matrix (minors of g).
template <typename T>
multivector_t<T> act(const matrix<T>& g, const multivector_t<T>& v) {
    const int d = v.dim();
    require(g.rows() == d && g.cols() == d, "act: dimension mismatch");
    const int k = v.grade();
    if (k == 0) return v;
    if (k == 1) return multivector_t<T>::from_coords(d, g.apply(v.components()));
    multivector_t<T> out(d, k);
    const auto subs = all_subsets(d, k);
    for (std::size_t s = 0; s < subs.size(); ++s) {
        const T& vs = v[static_cast<std::int64_t>(s)];
        if (vs == T(0)) continue;
        for (std::size_t t = 0; t < subs.size(); ++t) {
            const T m = minor_det(g, subs[t], subs[s]);
            if (m == T(0)) continue;
            out[static_cast<std::int64_t>(t)] += m * vs;
        }
    }
    return out;
}

/// Supremum norm: max absolute component.
template <typename T>
T sup_norm(const multivector_t<T>& v) {
    T best = T(0);
    for (std::int64_t i = 0; i < v.size(); ++i) {
        T a = v[i] < T(0) ? T(-v[i]) : v[i];
        if (a > best) best = a;
    }
    return best;
}

/// Split off the w+ factor:  v = w+ ^ head + tail, exactly.  head has grade
/// k-1 and tail grade k; both are supported on subsets avoiding index 0.
/// Since 0 precedes every other index, no sign adjustment is needed.
template <typename T>
struct wplus_split {
    multivector_t<T> head;
    multivector_t<T> tail;
};

template <typename T>
wplus_split<T> split_wplus(const multivector_t<T>& v) {
    const int d = v.dim(), k = v.grade();
    require(k >= 1 && k <= d, "split_wplus: grade out of range");
    wplus_split<T> out{multivector_t<T>(d, k - 1), multivector_t<T>(d, k)};
    const auto subs = all_subsets(d, k);
    for (std::size_t s = 0; s < subs.size(); ++s) {
        const T& c = v[static_cast<std::int64_t>(s)];
        if (c == T(0)) continue;
        if (subs[s].front() == 0) {
            index_subset rest(subs[s].begin() + 1, subs[s].end());
            out.head[subset_rank(rest, d)] = c;
        } else {
            out.tail[static_cast<std::int64_t>(s)] = c;
        }
    }
    return out;
}

} // namespace badflow
