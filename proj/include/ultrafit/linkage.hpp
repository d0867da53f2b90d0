#pragma once

#include "core.hpp"
#include "dendro.hpp"
#include "mst.hpp"

#include <array>
#include <string_view>

namespace ultrafit {

enum class LinkageMethod { single, complete, average, ward };

inline constexpr std::array<LinkageMethod, 4> all_linkage_methods{
    LinkageMethod::single, LinkageMethod::complete, LinkageMethod::average, LinkageMethod::ward};

inline constexpr std::string_view to_string(LinkageMethod m) noexcept
{
    switch (m) {
    case LinkageMethod::single:
        return "single";
    case LinkageMethod::complete:
        return "complete";
    case LinkageMethod::average:
        return "average";
    case LinkageMethod::ward:
        return "ward";
    }
    return "?";
}

/// Subdominant ultrametric: exact MST with the edge weights as heights.
inline Dendrogram single_linkage(const PointSet& points)
{
    const SpanningTree tree = exact_mst(points);
    std::vector<double> heights;
    heights.reserve(tree.edges().size());
    for (const auto& e : tree.edges()) {
        heights.push_back(e.w);
    }
    return build_dendrogram(tree, heights);
}

namespace detail {

/// Condensed upper-triangular dissimilarity matrix.
class CondensedMatrix {
public:
    explicit CondensedMatrix(std::size_t n) : n_(n), data_(n * (n - 1) / 2) {}

    double& operator()(index_t i, index_t j) noexcept { return data_[offset(i, j)]; }
    double operator()(index_t i, index_t j) const noexcept { return data_[offset(i, j)]; }

private:
    std::size_t offset(index_t i, index_t j) const noexcept
    {
        if (i > j) {
            std::swap(i, j);
        }
        return n_ * i - (i * (i + 1)) / 2 + (j - i - 1);
    }

    std::size_t n_;
    std::vector<double> data_;
};

} // namespace detail

/// Agglomerative clustering by the nearest-neighbour chain with Lance-Williams updates.
/// Ward runs on squared distances and reports the square root of the merge cost, so all
/// four methods report heights in distance units. Merges are stably sorted by height.
inline Dendrogram agglomerate(const PointSet& points, LinkageMethod method)
{
    const std::size_t n = points.size();
    if (n == 1) {
        return Dendrogram::from_merges(1, {});
    }
    const bool squared = method == LinkageMethod::ward;
    detail::CondensedMatrix dist(n);
    parallel_blocks(
        n,
        [&](std::size_t begin, std::size_t end) {
            for (index_t i = begin; i < end; ++i) {
                for (index_t j = i + 1; j < n; ++j) {
                    const double d2 = squared_distance(points[i], points[j]);
                    dist(i, j) = squared ? d2 : std::sqrt(d2);
                }
            }
        },
        64);

    std::vector<std::size_t> size(n, 1);
    std::vector<double> slot_height(n, 0.0);
    std::vector<LeafMerge> merges;
    merges.reserve(n - 1);
    std::vector<index_t> chain;
    chain.reserve(n);
    constexpr double inf = std::numeric_limits<double>::infinity();

    for (std::size_t step = 0; step + 1 < n; ++step) {
        if (chain.empty()) {
            for (index_t i = 0; i < n; ++i) {
                if (size[i] > 0) {
                    chain.push_back(i);
                    break;
                }
            }
        }
        index_t x = 0, y = 0;
        double best = inf;
        while (true) {
            x = chain.back();
            // preferring the previous chain element on ties guarantees termination
            if (chain.size() > 1) {
                y = chain[chain.size() - 2];
                best = dist(x, y);
            } else {
                best = inf;
            }
            for (index_t i = 0; i < n; ++i) {
                if (size[i] == 0 || i == x) {
                    continue;
                }
                const double d = dist(x, i);
                if (d < best) {
                    best = d;
                    y = i;
                }
            }
            if (chain.size() > 1 && y == chain[chain.size() - 2]) {
                break;
            }
            chain.push_back(y);
        }
        chain.pop_back();
        chain.pop_back();
        if (x > y) {
            std::swap(x, y);
        }

        const double nx = static_cast<double>(size[x]);
        const double ny = static_cast<double>(size[y]);
        const double height = std::max({squared ? std::sqrt(best) : best, slot_height[x], slot_height[y]});
        merges.push_back({x, y, height});

        // the merged cluster lives in slot y
        for (index_t k = 0; k < n; ++k) {
            if (size[k] == 0 || k == x || k == y) {
                continue;
            }
            const double dxk = dist(x, k);
            const double dyk = dist(y, k);
            double updated = 0.0;
            switch (method) {
            case LinkageMethod::single:
                updated = std::min(dxk, dyk);
                break;
            case LinkageMethod::complete:
                updated = std::max(dxk, dyk);
                break;
            case LinkageMethod::average:
                updated = (nx * dxk + ny * dyk) / (nx + ny);
                break;
            case LinkageMethod::ward: {
                const double nk = static_cast<double>(size[k]);
                updated = ((nx + nk) * dxk + (ny + nk) * dyk - nk * best) / (nx + ny + nk);
                break;
            }
            }
            dist(y, k) = updated;
        }
        size[y] = size[x] + size[y];
        size[x] = 0;
        slot_height[y] = height;
    }

    std::stable_sort(merges.begin(), merges.end(),
                     [](const LeafMerge& a, const LeafMerge& b) { return a.height < b.height; });
    return Dendrogram::from_merges(n, merges);
}

} // namespace ultrafit
