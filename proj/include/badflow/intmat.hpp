#pragma once

#include <cstdint>
#include <vector>

#include "badflow/core.hpp"
#include "badflow/rational.hpp"

namespace badflow {

/// Integer column vectors (coordinates w.r.t. an ambient lattice basis).
using int_vec = std::vector<std::int64_t>;

/// d x k integer matrix over GMP integers; column j generates the j-th vector.
/// GMP keeps the normal-form arithmetic overflow-free without size policing.
using int_matrix = std::vector<std::vector<bigz>>; // [row][col]

inline int_matrix to_int_matrix(const std::vector<int_vec>& cols, int rows) {
    int_matrix m(static_cast<std::size_t>(rows), std::vector<bigz>(cols.size(), 0));
    for (std::size_t j = 0; j < cols.size(); ++j)
        for (int i = 0; i < rows; ++i) m[static_cast<std::size_t>(i)][j] = cols[j][static_cast<std::size_t>(i)];
    return m;
}

/// Column-style Hermite normal form: unimodular column operations only, pivot
/// entries positive, entries right of a pivot zero, entries left of a pivot
/// reduced into [0, pivot).  The result is the canonical representative of the
/// column span over Z.
inline int_matrix hermite_normal_form(int_matrix m) {
    const int rows = static_cast<int>(m.size());
    const int cols = rows ? static_cast<int>(m[0].size()) : 0;
    int pivot_col = 0;
    for (int r = 0; r < rows && pivot_col < cols; ++r) {
        // eliminate across columns pivot_col..cols-1 in row r with gcd steps
        while (true) {
            int nz = -1;
            for (int c = pivot_col + 1; c < cols; ++c)
                if (m[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)] != 0) { nz = c; break; }
            if (m[static_cast<std::size_t>(r)][static_cast<std::size_t>(pivot_col)] == 0 && nz >= 0) {
                for (int i = 0; i < rows; ++i)
                    std::swap(m[static_cast<std::size_t>(i)][static_cast<std::size_t>(pivot_col)],
                              m[static_cast<std::size_t>(i)][static_cast<std::size_t>(nz)]);
                continue;
            }
            if (nz < 0) break;
            // reduce column nz by column pivot_col (or vice versa)
            const bigz a = m[static_cast<std::size_t>(r)][static_cast<std::size_t>(pivot_col)];
            const bigz b = m[static_cast<std::size_t>(r)][static_cast<std::size_t>(nz)];
            bigz q = b / a; // truncated division
            for (int i = 0; i < rows; ++i)
                m[static_cast<std::size_t>(i)][static_cast<std::size_t>(nz)] -= q * m[static_cast<std::size_t>(i)][static_cast<std::size_t>(pivot_col)];
            if (m[static_cast<std::size_t>(r)][static_cast<std::size_t>(nz)] != 0) {
                for (int i = 0; i < rows; ++i)
                    std::swap(m[static_cast<std::size_t>(i)][static_cast<std::size_t>(pivot_col)],
                              m[static_cast<std::size_t>(i)][static_cast<std::size_t>(nz)]);
            }
        }
        bigz& piv = m[static_cast<std::size_t>(r)][static_cast<std::size_t>(pivot_col)];
        if (piv == 0) continue; // no pivot in this row
        if (piv < 0)
            for (int i = 0; i < rows; ++i) m[static_cast<std::size_t>(i)][static_cast<std::size_t>(pivot_col)] = -m[static_cast<std::size_t>(i)][static_cast<std::size_t>(pivot_col)];
        // reduce earlier columns into [0, pivot)
        for (int c = 0; c < pivot_col; ++c) {
            bigz q;
            mpz_fdiv_q(q.get_mpz_t(), m[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)].get_mpz_t(), piv.get_mpz_t());
            if (q != 0)
                for (int i = 0; i < rows; ++i)
                    m[static_cast<std::size_t>(i)][static_cast<std::size_t>(c)] -= q * m[static_cast<std::size_t>(i)][static_cast<std::size_t>(pivot_col)];
        }
        ++pivot_col;
    }
    return m;
}

/// Elementary divisors (Smith normal form diagonal), nonzero entries only.
inline std::vector<bigz> elementary_divisors(int_matrix m) {
    const int rows = static_cast<int>(m.size());
    const int cols = rows ? static_cast<int>(m[0].size()) : 0;
    std::vector<bigz> divs;
    int top = 0, left = 0;
    while (top < rows && left < cols) {
        // find a nonzero pivot
        int pr = -1, pc = -1;
        for (int i = top; i < rows && pr < 0; ++i)
            for (int j = left; j < cols; ++j)
                if (m[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] != 0) { pr = i; pc = j; break; }
        if (pr < 0) break;
        std::swap(m[static_cast<std::size_t>(top)], m[static_cast<std::size_t>(pr)]);
        for (int i = 0; i < rows; ++i)
            std::swap(m[static_cast<std::size_t>(i)][static_cast<std::size_t>(left)], m[static_cast<std::size_t>(i)][static_cast<std::size_t>(pc)]);
        // clear row and column; restart if a remainder shrinks the pivot
        bool again = true;
        while (again) {
            again = false;
            for (int i = top + 1; i < rows; ++i) {
                bigz& a = m[static_cast<std::size_t>(i)][static_cast<std::size_t>(left)];
                if (a == 0) continue;
                bigz q = a / m[static_cast<std::size_t>(top)][static_cast<std::size_t>(left)];
                for (int j = left; j < cols; ++j)
                    m[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] -= q * m[static_cast<std::size_t>(top)][static_cast<std::size_t>(j)];
                if (a != 0) { std::swap(m[static_cast<std::size_t>(top)], m[static_cast<std::size_t>(i)]); again = true; }
            }
            for (int j = left + 1; j < cols; ++j) {
                bigz& a = m[static_cast<std::size_t>(top)][static_cast<std::size_t>(j)];
                if (a == 0) continue;
                bigz q = a / m[static_cast<std::size_t>(top)][static_cast<std::size_t>(left)];
                for (int i = top; i < rows; ++i)
                    m[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] -= q * m[static_cast<std::size_t>(i)][static_cast<std::size_t>(left)];
                if (a != 0) {
                    for (int i = 0; i < rows; ++i)
                        std::swap(m[static_cast<std::size_t>(i)][static_cast<std::size_t>(left)], m[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)]);
                    again = true;
                }
            }
        }
        bigz piv = m[static_cast<std::size_t>(top)][static_cast<std::size_t>(left)];
        if (piv < 0) piv = -piv;
        // fold in any entry not divisible by the pivot
        bool restart = false;
        for (int i = top + 1; i < rows && !restart; ++i)
            for (int j = left + 1; j < cols; ++j)
                if (m[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] % piv != 0) {
                    for (int jj = left; jj < cols; ++jj)
                        m[static_cast<std::size_t>(top)][static_cast<std::size_t>(jj)] += m[static_cast<std::size_t>(i)][static_cast<std::size_t>(jj)];
                    restart = true;
                    break;
                }
        if (restart) continue;
        divs.push_back(piv);
        ++top;
        ++left;
    }
    return divs;
}

/// Column span over Z has all elementary divisors equal to 1.
inline bool is_unimodular_span(const int_matrix& m, int expected_rank) {
    const auto d = elementary_divisors(m);
    if (static_cast<int>(d.size()) != expected_rank) return false;
    for (const auto& x : d)
        if (x != 1) return false;
    return true;
}

} // namespace badflow
