#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <map>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace ultrafit {

using index_t = std::size_t;

/// Immutable set of n points in R^d, stored row-major.
class PointSet {
public:
    PointSet() = default;

    PointSet(std::vector<double> coords, std::size_t dim)
        : coords_(std::move(coords)), dim_(dim)
    {
        if (dim_ == 0) {
            throw std::invalid_argument("PointSet: dimension must be >= 1");
        }
        if (coords_.empty() || coords_.size() % dim_ != 0) {
            throw std::invalid_argument("PointSet: need a non-empty n x d coordinate grid");
        }
        for (std::size_t k = 0; k < coords_.size(); ++k) {
            if (!std::isfinite(coords_[k])) {
                throw std::invalid_argument("PointSet: non-finite coordinate at point "
                                            + std::to_string(k / dim_) + ", column "
                                            + std::to_string(k % dim_));
            }
        }
        size_ = coords_.size() / dim_;
    }

    static PointSet from_rows(const std::vector<std::vector<double>>& rows)
    {
        if (rows.empty()) {
            throw std::invalid_argument("PointSet: no rows");
        }
        const std::size_t d = rows.front().size();
        std::vector<double> flat;
        flat.reserve(rows.size() * d);
        for (const auto& r : rows) {
            if (r.size() != d) {
                throw std::invalid_argument("PointSet: ragged rows");
            }
            flat.insert(flat.end(), r.begin(), r.end());
        }
        return PointSet(std::move(flat), d);
    }

    std::size_t size() const noexcept { return size_; }
    std::size_t dim() const noexcept { return dim_; }

    std::span<const double> operator[](index_t i) const noexcept
    {
        return {coords_.data() + i * dim_, dim_};
    }

    std::span<const double> at(index_t i) const
    {
        if (i >= size_) {
            throw std::out_of_range("PointSet: index " + std::to_string(i) + " out of range (n = "
                                    + std::to_string(size_) + ")");
        }
        return (*this)[i];
    }

    const std::vector<double>& coords() const noexcept { return coords_; }

    /// Returns a copy with rows reordered so that row k of the result is row perm[k] of this.
    PointSet permuted(std::span<const index_t> perm) const
    {
        std::vector<double> out;
        out.reserve(coords_.size());
        for (index_t k : perm) {
            auto row = at(k);
            out.insert(out.end(), row.begin(), row.end());
        }
        return PointSet(std::move(out), dim_);
    }

private:
    std::vector<double> coords_;
    std::size_t dim_ = 0;
    std::size_t size_ = 0;
};

inline double squared_distance(std::span<const double> a, std::span<const double> b) noexcept
{
    double acc = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) {
        const double diff = a[k] - b[k];
        acc += diff * diff;
    }
    return acc;
}

/// Euclidean distance between points i and j. Bit-identical for (i, j) and (j, i).
inline double distance(const PointSet& points, index_t i, index_t j)
{
    return std::sqrt(squared_distance(points.at(i), points.at(j)));
}

namespace detail {
inline double distance_unchecked(const PointSet& points, index_t i, index_t j) noexcept
{
    return std::sqrt(squared_distance(points[i], points[j]));
}
} // namespace detail

/// Edge carrying the true Euclidean length of its endpoints. Stored with u < v.
struct WeightedEdge {
    index_t u = 0;
    index_t v = 0;
    double w = 0.0;

    friend bool operator==(const WeightedEdge&, const WeightedEdge&) = default;
};

inline WeightedEdge make_edge(index_t a, index_t b, double w)
{
    if (a == b) {
        throw std::invalid_argument("WeightedEdge: self-loop on " + std::to_string(a));
    }
    if (!(w >= 0.0)) {
        throw std::invalid_argument("WeightedEdge: negative or NaN weight");
    }
    return a < b ? WeightedEdge{a, b, w} : WeightedEdge{b, a, w};
}

inline WeightedEdge make_edge(const PointSet& points, index_t a, index_t b)
{
    return make_edge(a, b, distance(points, a, b));
}

/// Total order used for every edge sort: (weight, min endpoint, max endpoint).
inline bool edge_less(const WeightedEdge& a, const WeightedEdge& b) noexcept
{
    const auto amin = std::min(a.u, a.v), amax = std::max(a.u, a.v);
    const auto bmin = std::min(b.u, b.v), bmax = std::max(b.u, b.v);
    if (a.w != b.w) {
        return a.w < b.w;
    }
    if (amin != bmin) {
        return amin < bmin;
    }
    return amax < bmax;
}

namespace detail {

/// Stable LSD radix sort of records by an unsigned key over its low `bits` bits.
template <class Record, class Key>
void radix_sort_by(std::vector<Record>& records, Key&& key_of, int bits = 64)
{
    const int passes = std::max(1, (bits + 15) / 16);
    const int digit = (bits + passes - 1) / passes;
    const std::size_t buckets = std::size_t{1} << digit;
    std::vector<Record> buffer(records.size());
    std::vector<std::size_t> count(buckets);
    for (int shift = 0; shift < bits; shift += digit) {
        std::fill(count.begin(), count.end(), 0);
        for (const auto& r : records) {
            ++count[(key_of(r) >> shift) & (buckets - 1)];
        }
        if (records.empty() || count[(key_of(records.front()) >> shift) & (buckets - 1)] == records.size()) {
            continue;
        }
        std::size_t sum = 0;
        for (auto& c : count) {
            sum += std::exchange(c, sum);
        }
        for (const auto& r : records) {
            buffer[count[(key_of(r) >> shift) & (buckets - 1)]++] = r;
        }
        records.swap(buffer);
    }
}

/// Bit pattern of a non-negative double, monotone in its value.
inline std::uint64_t weight_bits(double w) noexcept
{
    return std::bit_cast<std::uint64_t>(w + 0.0);
}

} // namespace detail

/// Sorts edges into edge_less order. Endpoints are normalised to u < v first.
inline void sort_edges(std::vector<WeightedEdge>& edges)
{
    for (auto& e : edges) {
        if (e.u > e.v) {
            std::swap(e.u, e.v);
        }
    }
    if (edges.size() < 4096) {
        std::sort(edges.begin(), edges.end(), edge_less);
        return;
    }
    auto by_index = [](const WeightedEdge& a, const WeightedEdge& b) {
        return a.u != b.u ? a.u < b.u : a.v < b.v;
    };
    // stable passes: (u, v) order first unless already there, then weight
    if (!std::is_sorted(edges.begin(), edges.end(), by_index)) {
        std::sort(edges.begin(), edges.end(), by_index);
    }
    detail::radix_sort_by(edges, [](const WeightedEdge& e) { return detail::weight_bits(e.w); });
}

/// Disjoint sets with union by size and path compression.
class UnionFind {
public:
    explicit UnionFind(std::size_t n = 0) : parent_(n), size_(n, 1), components_(n)
    {
        std::iota(parent_.begin(), parent_.end(), index_t{0});
    }

    std::size_t size() const noexcept { return parent_.size(); }
    std::size_t components() const noexcept { return components_; }

    index_t find(index_t x)
    {
        check(x);
        index_t root = x;
        while (parent_[root] != root) {
            root = parent_[root];
        }
        while (parent_[x] != root) {
            x = std::exchange(parent_[x], root);
        }
        return root;
    }

    /// Merges the sets of x and y and returns the surviving root. Larger set wins;
    /// equal sizes keep the smaller root index.
    index_t unite(index_t x, index_t y)
    {
        index_t rx = find(x);
        index_t ry = find(y);
        if (rx == ry) {
            return rx;
        }
        if (size_[rx] < size_[ry] || (size_[rx] == size_[ry] && ry < rx)) {
            std::swap(rx, ry);
        }
        parent_[ry] = rx;
        size_[rx] += size_[ry];
        --components_;
        return rx;
    }

    bool same(index_t x, index_t y) { return find(x) == find(y); }

    std::size_t set_size(index_t x) { return size_[find(x)]; }

private:
    void check(index_t x) const
    {
        if (x >= parent_.size()) {
            throw std::out_of_range("UnionFind: index " + std::to_string(x) + " out of range");
        }
    }

    std::vector<index_t> parent_;
    std::vector<std::size_t> size_;
    std::size_t components_;
};

struct Deduplicated {
    PointSet points;
    /// members[k] lists the original indices collapsed into point k, ascending.
    std::vector<std::vector<index_t>> members;

    bool has_duplicates() const noexcept { return members.size() != original_size(); }

    std::size_t original_size() const noexcept
    {
        std::size_t total = 0;
        for (const auto& m : members) {
            total += m.size();
        }
        return total;
    }
};

/// Collapses exact duplicates, preserving order of first occurrence.
inline Deduplicated dedupe(const PointSet& points)
{
    std::map<std::vector<double>, index_t> seen;
    std::vector<double> coords;
    std::vector<std::vector<index_t>> members;
    for (index_t i = 0; i < points.size(); ++i) {
        auto row = points[i];
        std::vector<double> key(row.begin(), row.end());
        auto [it, inserted] = seen.try_emplace(std::move(key), members.size());
        if (inserted) {
            coords.insert(coords.end(), row.begin(), row.end());
            members.push_back({i});
        } else {
            members[it->second].push_back(i);
        }
    }
    return {PointSet(std::move(coords), points.dim()), std::move(members)};
}

} // namespace ultrafit
