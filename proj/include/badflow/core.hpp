#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace badflow {

/// Thrown when an enumeration or sweep exceeds its configured budget
/// (node caps, iteration caps, coefficient overflow).
class resource_error : public std::runtime_error {
public:
    explicit resource_error(const std::string& what) : std::runtime_error(what) {}
};

inline void require(bool cond, const char* msg) {
    if (!cond) throw std::invalid_argument(msg);
}

// ---------------------------------------------------------------------------
// Subset combinatorics for exterior algebra indexing.
//
// Index subsets of {0..d-1} of fixed cardinality are stored as strictly
// increasing vectors and addressed by their lexicographic rank, so multivector
// components live in dense arrays of size C(d, k).  Dimensions stay tiny
// (d <= 16), everything fits in int64.
// ---------------------------------------------------------------------------

inline std::int64_t binomial(int n, int k) {
    if (k < 0 || k > n) return 0;
    if (k > n - k) k = n - k;
    std::int64_t r = 1;
    for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
    return r;
}

using index_subset = std::vector<int>;

/// Lexicographic rank of a strictly increasing subset of {0..d-1}.
inline std::int64_t subset_rank(const index_subset& s, int d) {
    const int k = static_cast<int>(s.size());
    std::int64_t rank = 0;
    int prev = -1;
    for (int i = 0; i < k; ++i) {
        for (int v = prev + 1; v < s[i]; ++v) rank += binomial(d - 1 - v, k - 1 - i);
        prev = s[i];
    }
    return rank;
}

/// Inverse of subset_rank.
inline index_subset subset_unrank(std::int64_t rank, int d, int k) {
    index_subset s(static_cast<std::size_t>(k));
    int v = 0;
    for (int i = 0; i < k; ++i) {
        while (true) {
            const std::int64_t block = binomial(d - 1 - v, k - 1 - i);
            if (rank < block) { s[static_cast<std::size_t>(i)] = v++; break; }
            rank -= block;
            ++v;
        }
    }
    return s;
}

/// All k-subsets of {0..d-1} in lexicographic (= rank) order.
inline std::vector<index_subset> all_subsets(int d, int k) {
    std::vector<index_subset> out;
    const std::int64_t n = binomial(d, k);
    out.reserve(static_cast<std::size_t>(n));
    for (std::int64_t r = 0; r < n; ++r) out.push_back(subset_unrank(r, d, k));
    return out;
}

/// Sign of the shuffle merging two disjoint increasing subsets, and the merged
/// subset.  Returns 0 if the subsets intersect.
inline int merge_subsets(const index_subset& a, const index_subset& b, index_subset& out) {
    out.clear();
    out.reserve(a.size() + b.size());
    std::size_t i = 0, j = 0;
    int inversions = 0;
    while (i < a.size() && j < b.size()) {
        if (a[i] == b[j]) return 0;
        if (a[i] < b[j]) {
            out.push_back(a[i++]);
        } else {
            // every remaining element of a jumps over b[j]
            inversions += static_cast<int>(a.size() - i);
            out.push_back(b[j++]);
        }
    }
    while (i < a.size()) out.push_back(a[i++]);
    while (j < b.size()) out.push_back(b[j++]);
    return (inversions % 2 == 0) ? 1 : -1;
}

} // namespace badflow
