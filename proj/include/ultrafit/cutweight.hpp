#pragma once

// Cut weights of spanning-tree edges. Tree edges are processed in ascending
// edge_less order; the edge being processed joins the two clusters C and D built
// from lighter edges, and C x D is exactly the set of pairs whose tree path has
// that edge as its maximum.

#include "core.hpp"
#include "mst.hpp"

namespace ultrafit {

/// One height per tree edge, aligned with SpanningTree::edges().
using EdgeHeights = std::vector<double>;

/// Exact cut weights: max distance over the pairs an edge separates first. O(n^2 d) worst case.
inline EdgeHeights exact_cut_weights(const PointSet& points, const SpanningTree& tree)
{
    const std::size_t n = points.size();
    if (tree.size() != n) {
        throw std::invalid_argument("exact_cut_weights: tree and point set sizes differ");
    }
    UnionFind uf(n);
    std::vector<std::vector<index_t>> members(n);
    for (index_t i = 0; i < n; ++i) {
        members[i] = {i};
    }
    EdgeHeights heights;
    heights.reserve(tree.edges().size());
    for (const auto& e : tree.edges()) {
        index_t a = uf.find(e.u);
        index_t b = uf.find(e.v);
        if (members[a].size() > members[b].size()) {
            std::swap(a, b);
        }
        double cw = 0.0;
        for (index_t x : members[a]) {
            for (index_t y : members[b]) {
                cw = std::max(cw, detail::distance_unchecked(points, x, y));
            }
        }
        heights.push_back(cw);
        const index_t root = uf.unite(a, b);
        const index_t other = root == a ? b : a;
        auto& dst = members[root];
        auto& src = members[other];
        dst.insert(dst.end(), src.begin(), src.end());
        std::vector<index_t>().swap(src);
    }
    return heights;
}

/// Union-find over points where every cluster keeps a fixed representative and the
/// largest distance from it to any member.
class ClusterState {
public:
    ClusterState(const PointSet& points)
        : points_(&points), uf_(points.size()), rep_(points.size()), radius_(points.size(), 0.0),
          members_(points.size())
    {
        for (index_t i = 0; i < points.size(); ++i) {
            rep_[i] = i;
            members_[i] = {i};
        }
    }

    index_t find(index_t x) { return uf_.find(x); }
    index_t representative(index_t x) { return rep_[find(x)]; }
    double radius(index_t x) { return radius_[find(x)]; }
    std::size_t cluster_size(index_t x) { return uf_.set_size(x); }
    const std::vector<index_t>& members(index_t x) { return members_[find(x)]; }

    /// Estimate of the cut weight of an edge joining the clusters of x and y, then merges
    /// them. The estimate lies in [CW, 5 CW].
    double merge(index_t x, index_t y)
    {
        index_t big = find(x);
        index_t small = find(y);
        if (big == small) {
            throw std::invalid_argument("ClusterState: endpoints already share a cluster");
        }
        if (members_[big].size() < members_[small].size()
            || (members_[big].size() == members_[small].size() && small < big)) {
            std::swap(big, small);
        }
        const index_t rep_big = rep_[big];
        const index_t rep_small = rep_[small];
        const double between = detail::distance_unchecked(*points_, rep_big, rep_small);
        const double estimate
            = 5.0 * std::max({between, radius_[big] - between, radius_[small] - between});

        double merged_radius = radius_[big];
        for (index_t m : members_[small]) {
            merged_radius = std::max(merged_radius, detail::distance_unchecked(*points_, m, rep_big));
        }

        // same tie rule as UnionFind, so `big` stays the root
        uf_.unite(big, small);
        radius_[big] = merged_radius;
        auto& dst = members_[big];
        dst.insert(dst.end(), members_[small].begin(), members_[small].end());
        std::vector<index_t>().swap(members_[small]);
        return estimate;
    }

private:
    const PointSet* points_;
    UnionFind uf_;
    std::vector<index_t> rep_;
    std::vector<double> radius_;
    std::vector<std::vector<index_t>> members_;
};

/// 5-estimate of the cut weights via representatives and radii, scanning only the
/// smaller cluster at each merge.
inline EdgeHeights approximate_cut_weights(const PointSet& points, const SpanningTree& tree)
{
    if (tree.size() != points.size()) {
        throw std::invalid_argument("approximate_cut_weights: tree and point set sizes differ");
    }
    ClusterState clusters(points);
    EdgeHeights heights;
    heights.reserve(tree.edges().size());
    for (const auto& e : tree.edges()) {
        heights.push_back(clusters.merge(e.u, e.v));
    }
    return heights;
}

} // namespace ultrafit
