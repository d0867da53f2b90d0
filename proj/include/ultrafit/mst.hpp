#pragma once

#include "core.hpp"
#include "parallel.hpp"
#include "spanner.hpp"

#include <limits>
#include <mutex>
#include <sstream>

namespace ultrafit {

/// Spanning tree over n points: exactly n - 1 edges, sorted by edge_less.
class SpanningTree {
public:
    SpanningTree() = default;

    SpanningTree(std::size_t n, std::vector<WeightedEdge> edges) : n_(n), edges_(std::move(edges))
    {
        if (n_ == 0) {
            throw std::invalid_argument("SpanningTree: empty vertex set");
        }
        if (edges_.size() != n_ - 1) {
            throw std::invalid_argument("SpanningTree: expected " + std::to_string(n_ - 1) + " edges, got "
                                        + std::to_string(edges_.size()));
        }
        UnionFind uf(n_);
        for (auto& e : edges_) {
            if (e.u >= n_ || e.v >= n_ || e.u == e.v) {
                throw std::invalid_argument("SpanningTree: bad edge endpoint");
            }
            if (e.u > e.v) {
                std::swap(e.u, e.v);
            }
            if (uf.same(e.u, e.v)) {
                throw std::invalid_argument("SpanningTree: edge (" + std::to_string(e.u) + ", "
                                            + std::to_string(e.v) + ") closes a cycle");
            }
            uf.unite(e.u, e.v);
        }
        std::sort(edges_.begin(), edges_.end(), edge_less);
        adjacency_ = detail::build_adjacency(n_, edges_);
    }

    std::size_t size() const noexcept { return n_; }
    const std::vector<WeightedEdge>& edges() const noexcept { return edges_; }

    double total_weight() const noexcept
    {
        double total = 0.0;
        for (const auto& e : edges_) {
            total += e.w;
        }
        return total;
    }

    /// (neighbour, edge weight) pairs of vertex v.
    std::span<const std::pair<index_t, double>> neighbours(index_t v) const
    {
        return {adjacency_.targets.data() + adjacency_.offsets[v],
                adjacency_.offsets[v + 1] - adjacency_.offsets[v]};
    }

private:
    std::size_t n_ = 0;
    std::vector<WeightedEdge> edges_;
    detail::Adjacency adjacency_;
};

/// Thrown by kruskal when the input graph does not span all vertices. Carries the
/// minimum spanning forest so the caller can repair it with connect_components.
class DisconnectedGraphError : public std::runtime_error {
public:
    DisconnectedGraphError(std::vector<WeightedEdge> forest, std::vector<std::vector<index_t>> components)
        : std::runtime_error(describe(components)), forest_(std::move(forest)),
          components_(std::move(components))
    {
    }

    const std::vector<WeightedEdge>& forest() const noexcept { return forest_; }
    const std::vector<std::vector<index_t>>& components() const noexcept { return components_; }

private:
    static std::string describe(const std::vector<std::vector<index_t>>& comps)
    {
        std::ostringstream os;
        os << "kruskal: graph has " << comps.size() << " components; smallest members:";
        for (std::size_t c = 0; c < comps.size() && c < 8; ++c) {
            os << ' ' << comps[c].front() << "(" << comps[c].size() << ")";
        }
        if (comps.size() > 8) {
            os << " ...";
        }
        return os.str();
    }

    std::vector<WeightedEdge> forest_;
    std::vector<std::vector<index_t>> components_;
};

/// Minimum spanning forest of the graph, in edge_less order.
inline std::vector<WeightedEdge> kruskal_forest(std::size_t n, std::span<const WeightedEdge> input)
{
    if (input.size() >= (std::size_t{1} << 32)) {
        throw std::length_error("kruskal: more than 2^32 edges");
    }
    for (const auto& e : input) {
        if (e.u >= n || e.v >= n) {
            throw std::out_of_range("kruskal: edge endpoint out of range");
        }
        if (e.u == e.v) {
            throw std::invalid_argument("kruskal: self-loop on " + std::to_string(e.u));
        }
    }
    UnionFind uf(n);
    std::vector<WeightedEdge> forest;
    forest.reserve(n > 0 ? n - 1 : 0);
    auto scan = [&](std::vector<WeightedEdge>& light) {
        sort_edges(light);
        for (const auto& e : light) {
            if (!uf.same(e.u, e.v)) {
                uf.unite(e.u, e.v);
                forest.push_back(e);
                if (forest.size() + 1 == n) {
                    return;
                }
            }
        }
    };
    const std::size_t slice = std::max<std::size_t>(4 * n, 4096);

    // Kruskal over successive lightest slices; usually the first slice already spans
    std::vector<WeightedEdge> pending;
    if (input.size() > 2 * slice) {
        // weight threshold from a strided sample, so the light slice is collected in one pass
        const std::size_t stride = std::max<std::size_t>(1, input.size() / 8192);
        std::vector<double> sample;
        for (std::size_t i = 0; i < input.size(); i += stride) {
            sample.push_back(input[i].w);
        }
        const std::size_t q = std::min(sample.size() - 1, sample.size() * slice / input.size());
        std::nth_element(sample.begin(), sample.begin() + static_cast<std::ptrdiff_t>(q), sample.end());
        const double threshold = sample[q];
        std::vector<WeightedEdge> light;
        for (const auto& e : input) {
            if (e.w <= threshold) {
                light.push_back(e);
            }
        }
        scan(light);
        if (forest.size() + 1 < n) {
            for (const auto& e : input) {
                if (e.w > threshold && !uf.same(e.u, e.v)) {
                    pending.push_back(e);
                }
            }
        }
    } else {
        pending.assign(input.begin(), input.end());
    }
    while (!pending.empty() && forest.size() + 1 < n) {
        const std::size_t take = std::min(pending.size(), slice);
        if (take < pending.size()) {
            std::nth_element(pending.begin(), pending.begin() + static_cast<std::ptrdiff_t>(take), pending.end(),
                             edge_less);
        }
        std::vector<WeightedEdge> light(pending.begin(), pending.begin() + static_cast<std::ptrdiff_t>(take));
        scan(light);
        auto rest = pending.begin() + static_cast<std::ptrdiff_t>(take);
        auto keep = std::remove_if(rest, pending.end(), [&](const WeightedEdge& e) { return uf.same(e.u, e.v); });
        pending.erase(keep, pending.end());
        pending.erase(pending.begin(), rest);
    }
    return forest;
}

namespace detail {
inline std::vector<std::vector<index_t>> components_of(std::size_t n, std::span<const WeightedEdge> forest)
{
    UnionFind uf(n);
    for (const auto& e : forest) {
        uf.unite(e.u, e.v);
    }
    std::vector<std::vector<index_t>> by_root(n);
    for (index_t i = 0; i < n; ++i) {
        by_root[uf.find(i)].push_back(i);
    }
    std::vector<std::vector<index_t>> comps;
    for (auto& c : by_root) {
        if (!c.empty()) {
            comps.push_back(std::move(c));
        }
    }
    return comps;
}
} // namespace detail

/// Minimum spanning tree of the graph; throws DisconnectedGraphError if it does not span.
inline SpanningTree kruskal(std::size_t n, std::span<const WeightedEdge> edges)
{
    auto forest = kruskal_forest(n, edges);
    if (forest.size() + 1 != n) {
        auto comps = detail::components_of(n, forest);
        throw DisconnectedGraphError(std::move(forest), std::move(comps));
    }
    return SpanningTree(n, std::move(forest));
}

inline SpanningTree kruskal(const SpannerGraph& graph)
{
    return kruskal(graph.n, graph.edges);
}

/// Completes a forest into a spanning tree: repeatedly joins the smallest component to
/// its exact nearest point outside it.
inline SpanningTree connect_components(const PointSet& points, std::vector<WeightedEdge> forest)
{
    const std::size_t n = points.size();
    UnionFind uf(n);
    for (const auto& e : forest) {
        if (uf.same(e.u, e.v)) {
            throw std::invalid_argument("connect_components: forest contains a cycle");
        }
        uf.unite(e.u, e.v);
    }
    while (uf.components() > 1) {
        std::vector<std::vector<index_t>> members(n);
        for (index_t i = 0; i < n; ++i) {
            members[uf.find(i)].push_back(i);
        }
        const std::vector<index_t>* smallest = nullptr;
        for (const auto& m : members) {
            if (!m.empty() && (smallest == nullptr || m.size() < smallest->size())) {
                smallest = &m;
            }
        }
        const index_t root = uf.find(smallest->front());
        WeightedEdge best{0, 0, std::numeric_limits<double>::infinity()};
        for (index_t a : *smallest) {
            for (index_t b = 0; b < n; ++b) {
                if (uf.find(b) == root) {
                    continue;
                }
                const WeightedEdge cand = make_edge(a, b, detail::distance_unchecked(points, a, b));
                if (edge_less(cand, best)) {
                    best = cand;
                }
            }
        }
        uf.unite(best.u, best.v);
        forest.push_back(best);
    }
    return SpanningTree(n, std::move(forest));
}

inline SpanningTree connect_components(const PointSet& points, const SpanningTree& tree)
{
    return connect_components(points, tree.edges());
}

/// Exact Euclidean MST by dense Prim, O(n^2 d). Candidate edges compare with edge_less,
/// so the result equals Kruskal on the complete graph edge for edge.
inline SpanningTree exact_mst(const PointSet& points)
{
    const std::size_t n = points.size();
    constexpr double inf = std::numeric_limits<double>::infinity();
    std::vector<WeightedEdge> best(n, WeightedEdge{0, 0, inf});
    std::vector<char> in_tree(n, 0);
    std::vector<WeightedEdge> edges;
    edges.reserve(n > 0 ? n - 1 : 0);

    index_t current = 0;
    in_tree[0] = 1;
    for (std::size_t step = 1; step < n; ++step) {
        std::vector<index_t> candidates;
        std::mutex lock;
        parallel_blocks(
            n,
            [&](std::size_t begin, std::size_t end) {
                index_t local = n;
                for (index_t v = begin; v < end; ++v) {
                    if (in_tree[v]) {
                        continue;
                    }
                    const double w = detail::distance_unchecked(points, current, v);
                    const WeightedEdge cand = current < v ? WeightedEdge{current, v, w} : WeightedEdge{v, current, w};
                    if (edge_less(cand, best[v])) {
                        best[v] = cand;
                    }
                    if (local == n || edge_less(best[v], best[local])) {
                        local = v;
                    }
                }
                if (local != n) {
                    std::lock_guard guard(lock);
                    candidates.push_back(local);
                }
            },
            4096);
        index_t next = n;
        for (index_t c : candidates) {
            if (next == n || edge_less(best[c], best[next])) {
                next = c;
            }
        }
        in_tree[next] = 1;
        edges.push_back(best[next]);
        current = next;
    }
    return SpanningTree(n, std::move(edges));
}

/// Smallest gamma >= 1 for which the tree is a gamma-approximate Kruskal tree of the
/// complete Euclidean graph: max over pairs of (max tree-path edge) / distance. O(n^2 d).
inline double kt_factor(const PointSet& points, const SpanningTree& tree)
{
    const std::size_t n = points.size();
    if (tree.size() != n) {
        throw std::invalid_argument("kt_factor: tree and point set sizes differ");
    }
    std::mutex lock;
    double worst = 1.0;
    parallel_blocks(
        n,
        [&](std::size_t begin, std::size_t end) {
            std::vector<double> path_max(n);
            std::vector<index_t> stack;
            std::vector<index_t> parent(n);
            double local = 1.0;
            for (index_t s = begin; s < end; ++s) {
                path_max[s] = 0.0;
                parent[s] = s;
                stack.assign(1, s);
                while (!stack.empty()) {
                    const index_t x = stack.back();
                    stack.pop_back();
                    for (auto [y, w] : tree.neighbours(x)) {
                        if (y == parent[x]) {
                            continue;
                        }
                        parent[y] = x;
                        path_max[y] = std::max(path_max[x], w);
                        stack.push_back(y);
                    }
                }
                for (index_t t = s + 1; t < n; ++t) {
                    local = std::max(local, path_max[t] / detail::distance_unchecked(points, s, t));
                }
            }
            std::lock_guard guard(lock);
            worst = std::max(worst, local);
        },
        16);
    return worst;
}

} // namespace ultrafit
