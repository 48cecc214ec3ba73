#pragma once

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <vector>

namespace pc2 {

/// Tuple of per-variable polynomial degrees identifying one tensor-product
/// basis function.
struct MultiIndex {
    std::vector<int> degrees;

    MultiIndex() = default;
    explicit MultiIndex(std::vector<int> d) : degrees(std::move(d)) {}

    int dimension() const { return static_cast<int>(degrees.size()); }
    int total() const { return std::accumulate(degrees.begin(), degrees.end(), 0); }
    bool is_zero() const {
        return std::all_of(degrees.begin(), degrees.end(), [](int d) { return d == 0; });
    }

    bool operator==(const MultiIndex&) const = default;
};

/// Graded-lexicographic order: first by total degree, ties broken so that
/// higher leading degrees come first ((2,0) before (1,1) before (0,2)).
inline bool graded_lex_less(const MultiIndex& a, const MultiIndex& b) {
    const int ta = a.total();
    const int tb = b.total();
    if (ta != tb) return ta < tb;
    return std::lexicographical_compare(b.degrees.begin(), b.degrees.end(),
                                        a.degrees.begin(), a.degrees.end());
}

/// Ordered truncated index set. The zero multi-index is always present and
/// first; the order is canonical (graded-lex) so serialized models are stable.
struct BasisSet {
    int dimension = 0;
    int max_degree = 0;
    std::vector<MultiIndex> indices;

    int size() const { return static_cast<int>(indices.size()); }

    /// Sub-basis keeping the given positions (in the given order).
    BasisSet subset(const std::vector<int>& positions) const {
        BasisSet out;
        out.dimension = dimension;
        out.indices.reserve(positions.size());
        int md = 0;
        for (int pos : positions) {
            if (pos < 0 || pos >= size())
                throw std::out_of_range("BasisSet::subset: position out of range");
            out.indices.push_back(indices[pos]);
            md = std::max(md, indices[pos].total());
        }
        out.max_degree = md;
        return out;
    }
};

/// (M+p)! / (M! p!) without intermediate overflow.
inline std::uint64_t total_degree_cardinality(int dimension, int max_degree) {
    std::uint64_t card = 1;
    for (int i = 1; i <= dimension; ++i)
        card = card * static_cast<std::uint64_t>(max_degree + i) / static_cast<std::uint64_t>(i);
    return card;
}

namespace detail {
inline void enumerate_compositions(int dim, int pos, int remaining, std::vector<int>& scratch,
                                   std::vector<MultiIndex>& out) {
    if (pos == dim - 1) {
        scratch[pos] = remaining;
        out.emplace_back(scratch);
        return;
    }
    for (int d = remaining; d >= 0; --d) {
        scratch[pos] = d;
        enumerate_compositions(dim, pos + 1, remaining - d, scratch, out);
    }
}
}  // namespace detail

/// All multi-indices with total degree <= max_degree, graded-lex ordered.
inline BasisSet multi_index_set(int dimension, int max_degree) {
    if (dimension < 1) throw std::invalid_argument("multi_index_set: dimension must be >= 1");
    if (max_degree < 0) throw std::invalid_argument("multi_index_set: max degree must be >= 0");
    BasisSet basis;
    basis.dimension = dimension;
    basis.max_degree = max_degree;
    basis.indices.reserve(total_degree_cardinality(dimension, max_degree));
    std::vector<int> scratch(dimension, 0);
    for (int t = 0; t <= max_degree; ++t)
        detail::enumerate_compositions(dimension, 0, t, scratch, basis.indices);
    return basis;
}

}  // namespace pc2
