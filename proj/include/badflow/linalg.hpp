#pragma once

#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <vector>

#include "badflow/core.hpp"

namespace badflow {

/// Dense row-major matrix over an exact or floating scalar.  Dimensions in
/// this library never exceed ~10, so no blocking, no views, no cleverness.
template <typename T>
class matrix {
public:
    matrix() = default;
    matrix(int rows, int cols, T fill = T(0))
        : rows_(rows), cols_(cols), data_(static_cast<std::size_t>(rows) * cols, fill) {}

    static matrix identity(int n) {
        matrix m(n, n);
        for (int i = 0; i < n; ++i) m(i, i) = T(1);
        return m;
    }

    static matrix diagonal(const std::vector<T>& d) {
        matrix m(static_cast<int>(d.size()), static_cast<int>(d.size()));
        for (int i = 0; i < m.rows(); ++i) m(i, i) = d[static_cast<std::size_t>(i)];
        return m;
    }

    int rows() const { return rows_; }
    int cols() const { return cols_; }

    T& operator()(int r, int c) { return data_[static_cast<std::size_t>(r) * cols_ + c]; }
    const T& operator()(int r, int c) const { return data_[static_cast<std::size_t>(r) * cols_ + c]; }

    std::vector<T> column(int c) const {
        std::vector<T> v(static_cast<std::size_t>(rows_));
        for (int r = 0; r < rows_; ++r) v[static_cast<std::size_t>(r)] = (*this)(r, c);
        return v;
    }

    void set_column(int c, const std::vector<T>& v) {
        for (int r = 0; r < rows_; ++r) (*this)(r, c) = v[static_cast<std::size_t>(r)];
    }

    friend matrix operator*(const matrix& a, const matrix& b) {
        matrix out(a.rows(), b.cols());
        for (int i = 0; i < a.rows(); ++i)
            for (int k = 0; k < a.cols(); ++k) {
                const T& aik = a(i, k);
                if (aik == T(0)) continue;
                for (int j = 0; j < b.cols(); ++j) out(i, j) += aik * b(k, j);
            }
        return out;
    }

    std::vector<T> apply(const std::vector<T>& v) const {
        std::vector<T> out(static_cast<std::size_t>(rows_), T(0));
        for (int i = 0; i < rows_; ++i)
            for (int j = 0; j < cols_; ++j) out[static_cast<std::size_t>(i)] += (*this)(i, j) * v[static_cast<std::size_t>(j)];
        return out;
    }

    matrix transposed() const {
        matrix out(cols_, rows_);
        for (int i = 0; i < rows_; ++i)
            for (int j = 0; j < cols_; ++j) out(j, i) = (*this)(i, j);
        return out;
    }

    bool operator==(const matrix& o) const {
        return rows_ == o.rows_ && cols_ == o.cols_ && data_ == o.data_;
    }

private:
    int rows_ = 0, cols_ = 0;
    std::vector<T> data_;
};

/// Determinant by Gaussian elimination with partial pivoting.  Exact when T is
/// an exact field (division is exact), standard LU otherwise.
template <typename T>
T determinant(matrix<T> m) {
    require(m.rows() == m.cols(), "determinant: square matrix required");
    const int n = m.rows();
    T det = T(1);
    for (int col = 0; col < n; ++col) {
        int pivot = -1;
        if constexpr (std::is_floating_point_v<T>) {
            T best = T(0);
            for (int r = col; r < n; ++r) {
                const T a = std::abs(m(r, col));
                if (a > best) { best = a; pivot = r; }
            }
        } else {
            for (int r = col; r < n; ++r)
                if (m(r, col) != T(0)) { pivot = r; break; }
        }
        if (pivot < 0) return T(0);
        if (pivot != col) {
            for (int j = 0; j < n; ++j) std::swap(m(pivot, j), m(col, j));
            det = -det;
        }
        const T p = m(col, col);
        if (p == T(0)) return T(0);
        det *= p;
        for (int r = col + 1; r < n; ++r) {
            const T f = m(r, col) / p;
            if (f == T(0)) continue;
            for (int j = col; j < n; ++j) m(r, j) -= f * m(col, j);
        }
    }
    return det;
}

/// Determinant of the submatrix with the given rows/columns.
template <typename T>
T minor_det(const matrix<T>& m, const index_subset& rows, const index_subset& cols) {
    const int k = static_cast<int>(rows.size());
    matrix<T> sub(k, k);
    for (int i = 0; i < k; ++i)
        for (int j = 0; j < k; ++j)
            sub(i, j) = m(rows[static_cast<std::size_t>(i)], cols[static_cast<std::size_t>(j)]);
    return determinant(sub);
}

template <typename T>
T sup_norm(const std::vector<T>& v) {
    T best = T(0);
    for (const T& x : v) {
        T a = x < T(0) ? T(-x) : x;
        if (a > best) best = a;
    }
    return best;
}

inline double euclid_norm(const std::vector<double>& v) {
    double s = 0;
    for (double x : v) s += x * x;
    return std::sqrt(s);
}

inline double dot(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

} // namespace badflow
