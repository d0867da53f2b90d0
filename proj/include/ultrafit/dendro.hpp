#pragma once

#include "core.hpp"
#include "cutweight.hpp"
#include "mst.hpp"
#include "parallel.hpp"

#include <bit>
#include <charconv>
#include <limits>
#include <mutex>
#include <optional>
#include <ostream>

namespace ultrafit {

class DendrogramError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A merge of the clusters currently holding leaves `a` and `b`.
struct LeafMerge {
    index_t a = 0;
    index_t b = 0;
    double height = 0.0;
};

/// One merge-list row: node ids (leaves 0..n-1, internal n..2n-2), height, leaf count.
struct MergeRow {
    index_t left = 0;
    index_t right = 0;
    double height = 0.0;
    std::size_t size = 0;

    friend bool operator==(const MergeRow&, const MergeRow&) = default;
};

/// Rooted binary tree over n leaves whose internal heights never decrease towards the
/// root. Leaf ids are 0..n-1, internal node n + k is the k-th merge. The induced
/// ultrametric is the height of the least common ancestor, answered in O(1) after an
/// Euler-tour + sparse-table build.
class Dendrogram {
public:
    Dendrogram() = default;

    /// Applies the merges in order. Throws DendrogramError if a merge joins a cluster with
    /// itself, lowers a height below a child, or the merges do not form a single tree.
    static Dendrogram from_merges(std::size_t n, std::span<const LeafMerge> merges)
    {
        if (n == 0) {
            throw DendrogramError("dendrogram: no leaves");
        }
        if (merges.size() + 1 != n) {
            throw DendrogramError("dendrogram: expected " + std::to_string(n - 1) + " merges, got "
                                  + std::to_string(merges.size()));
        }
        std::vector<MergeRow> rows;
        rows.reserve(merges.size());
        UnionFind uf(n);
        std::vector<index_t> node_of(n);
        std::iota(node_of.begin(), node_of.end(), index_t{0});
        std::vector<double> heights(2 * n - 1, 0.0);
        std::vector<std::size_t> sizes(2 * n - 1, 1);
        for (const auto& m : merges) {
            if (m.a >= n || m.b >= n) {
                throw DendrogramError("dendrogram: leaf out of range in merge");
            }
            const index_t ra = uf.find(m.a);
            const index_t rb = uf.find(m.b);
            if (ra == rb) {
                throw DendrogramError("dendrogram: merge joins leaves " + std::to_string(m.a) + " and "
                                      + std::to_string(m.b) + " that already share a cluster");
            }
            const index_t left = node_of[ra];
            const index_t right = node_of[rb];
            const index_t id = n + rows.size();
            check_height(m.height, std::max(heights[left], heights[right]), id);
            heights[id] = m.height;
            sizes[id] = sizes[left] + sizes[right];
            rows.push_back({left, right, m.height, sizes[id]});
            node_of[uf.unite(ra, rb)] = id;
        }
        return Dendrogram(n, std::move(rows));
    }

    /// Rebuilds from merge-list rows, validating ids, sizes and monotone heights.
    static Dendrogram from_rows(std::size_t n, std::vector<MergeRow> rows)
    {
        if (n == 0) {
            throw DendrogramError("dendrogram: no leaves");
        }
        if (rows.size() + 1 != n) {
            throw DendrogramError("dendrogram: expected " + std::to_string(n - 1) + " rows, got "
                                  + std::to_string(rows.size()));
        }
        std::vector<char> used(2 * n - 1, 0);
        std::vector<double> heights(2 * n - 1, 0.0);
        std::vector<std::size_t> sizes(2 * n - 1, 1);
        for (std::size_t k = 0; k < rows.size(); ++k) {
            const auto& r = rows[k];
            const index_t id = n + k;
            for (index_t child : {r.left, r.right}) {
                if (child >= id) {
                    throw DendrogramError("dendrogram: row " + std::to_string(k) + " references node "
                                          + std::to_string(child) + " before it exists");
                }
                if (used[child]) {
                    throw DendrogramError("dendrogram: node " + std::to_string(child) + " has two parents");
                }
                used[child] = 1;
            }
            if (r.left == r.right) {
                throw DendrogramError("dendrogram: row " + std::to_string(k) + " merges a node with itself");
            }
            check_height(r.height, std::max(heights[r.left], heights[r.right]), id);
            heights[id] = r.height;
            sizes[id] = sizes[r.left] + sizes[r.right];
            if (r.size != sizes[id]) {
                throw DendrogramError("dendrogram: row " + std::to_string(k) + " declares size "
                                      + std::to_string(r.size) + ", subtree has " + std::to_string(sizes[id]));
            }
        }
        return Dendrogram(n, std::move(rows));
    }

    std::size_t leaves() const noexcept { return n_; }
    index_t root() const noexcept { return n_ == 0 ? 0 : 2 * n_ - 2; }
    const std::vector<MergeRow>& merges() const noexcept { return rows_; }

    bool is_leaf(index_t id) const noexcept { return id < n_; }
    double height(index_t id) const { return is_leaf(id) ? 0.0 : rows_.at(id - n_).height; }
    std::size_t subtree_size(index_t id) const { return is_leaf(id) ? 1 : rows_.at(id - n_).size; }

    index_t lca(index_t u, index_t v) const
    {
        if (u >= n_ || v >= n_) {
            throw std::out_of_range("dendrogram: leaf id out of range");
        }
        if (u == v) {
            return u;
        }
        std::size_t a = first_[u], b = first_[v];
        if (a > b) {
            std::swap(a, b);
        }
        const std::size_t level = std::bit_width(b - a + 1) - 1;
        const index_t x = table_[level][a];
        const index_t y = table_[level][b + 1 - (std::size_t{1} << level)];
        return depth_[x] <= depth_[y] ? x : y;
    }

    /// Ultrametric distance: height of the least common ancestor, 0 on the diagonal.
    double distance(index_t u, index_t v) const
    {
        const index_t node = lca(u, v);
        return u == v ? 0.0 : height(node);
    }

    /// Same topology, every height multiplied by `factor` (> 0).
    Dendrogram scaled(double factor) const
    {
        if (!(factor > 0.0) || !std::isfinite(factor)) {
            throw std::invalid_argument("dendrogram: scale factor must be positive and finite");
        }
        Dendrogram out = *this;
        for (auto& r : out.rows_) {
            r.height *= factor;
        }
        return out;
    }

    /// Induced dendrogram on a subset of leaves; leaf k of the result is leaves[k].
    Dendrogram restrict_to(std::span<const index_t> leaves) const
    {
        std::vector<index_t> picked(2 * n_ - 1, std::numeric_limits<index_t>::max());
        constexpr index_t none = std::numeric_limits<index_t>::max();
        for (std::size_t k = 0; k < leaves.size(); ++k) {
            if (leaves[k] >= n_ || picked[leaves[k]] != none) {
                throw std::invalid_argument("dendrogram: restrict_to needs distinct valid leaves");
            }
            picked[leaves[k]] = k;
        }
        std::vector<LeafMerge> merges;
        for (std::size_t k = 0; k < rows_.size(); ++k) {
            const auto& r = rows_[k];
            const index_t a = picked[r.left], b = picked[r.right];
            if (a != none && b != none) {
                merges.push_back({a, b, r.height});
            }
            picked[n_ + k] = a != none ? a : b;
        }
        return from_merges(leaves.size(), merges);
    }

    bool heights_monotone() const noexcept
    {
        for (const auto& r : rows_) {
            if (!(r.height >= height(r.left) && r.height >= height(r.right))) {
                return false;
            }
        }
        return true;
    }

private:
    Dendrogram(std::size_t n, std::vector<MergeRow> rows) : n_(n), rows_(std::move(rows)) { build_index(); }

    static void check_height(double h, double child_max, index_t id)
    {
        if (!std::isfinite(h) || h < 0.0) {
            throw DendrogramError("dendrogram: node " + std::to_string(id) + " has invalid height");
        }
        if (h < child_max) {
            throw DendrogramError("dendrogram: node " + std::to_string(id)
                                  + " is lower than its child (heights must be monotone)");
        }
    }

    void build_index()
    {
        const std::size_t nodes = 2 * n_ - 1;
        depth_.assign(nodes, 0);
        first_.assign(n_, 0);
        std::vector<index_t> tour;
        tour.reserve(2 * nodes);
        // iterative Euler tour: (node, next child slot)
        std::vector<std::pair<index_t, int>> stack{{root(), 0}};
        while (!stack.empty()) {
            auto& [node, slot] = stack.back();
            tour.push_back(node);
            if (is_leaf(node)) {
                first_[node] = tour.size() - 1;
                stack.pop_back();
                continue;
            }
            if (slot == 2) {
                stack.pop_back();
                continue;
            }
            const auto& r = rows_[node - n_];
            const index_t child = slot == 0 ? r.left : r.right;
            ++slot;
            depth_[child] = depth_[node] + 1;
            stack.emplace_back(child, 0);
        }
        const std::size_t len = tour.size();
        const std::size_t levels = std::bit_width(len);
        table_.assign(levels, {});
        table_[0] = std::move(tour);
        for (std::size_t l = 1; l < levels; ++l) {
            const std::size_t span = std::size_t{1} << l;
            const auto& prev = table_[l - 1];
            auto& cur = table_[l];
            cur.resize(len - span + 1);
            for (std::size_t i = 0; i + span <= len; ++i) {
                const index_t x = prev[i], y = prev[i + span / 2];
                cur[i] = depth_[x] <= depth_[y] ? x : y;
            }
        }
    }

    std::size_t n_ = 0;
    std::vector<MergeRow> rows_;
    std::vector<std::size_t> depth_;
    std::vector<std::size_t> first_;
    std::vector<std::vector<index_t>> table_;
};

/// Cartesian tree of a spanning tree under the given edge heights: edges are applied in
/// ascending (height, min endpoint, max endpoint) order, each joining the clusters of
/// its endpoints (the cluster of the smaller endpoint becomes the left child).
inline Dendrogram build_dendrogram(const SpanningTree& tree, std::span<const double> heights)
{
    const auto& edges = tree.edges();
    if (heights.size() != edges.size()) {
        throw std::invalid_argument("build_dendrogram: " + std::to_string(heights.size())
                                    + " heights for " + std::to_string(edges.size()) + " edges");
    }
    std::vector<std::size_t> order(edges.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    for (double h : heights) {
        if (!(h >= 0.0) || !std::isfinite(h)) {
            throw std::invalid_argument("build_dendrogram: heights must be finite and non-negative");
        }
    }
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return edge_less({edges[a].u, edges[a].v, heights[a]}, {edges[b].u, edges[b].v, heights[b]});
    });
    std::vector<LeafMerge> merges;
    merges.reserve(order.size());
    for (std::size_t k : order) {
        merges.push_back({edges[k].u, edges[k].v, heights[k]});
    }
    return Dendrogram::from_merges(tree.size(), merges);
}

inline double ultra_distance(const Dendrogram& dendro, index_t u, index_t v)
{
    return dendro.distance(u, v);
}

namespace detail {

/// Max over pairs u < v of f(u, v), rows split across workers; order-independent.
template <class F>
double max_over_pairs(std::size_t n, F&& f)
{
    std::mutex lock;
    double result = -std::numeric_limits<double>::infinity();
    parallel_blocks(
        n,
        [&](std::size_t begin, std::size_t end) {
            double local = -std::numeric_limits<double>::infinity();
            for (index_t u = begin; u < end; ++u) {
                for (index_t v = u + 1; v < n; ++v) {
                    local = std::max(local, f(u, v));
                }
            }
            std::lock_guard guard(lock);
            result = std::max(result, local);
        },
        16);
    return result;
}

} // namespace detail

struct Normalized {
    Dendrogram dendrogram;
    double scale = 1.0;
};

/// Scales the ultrametric by the smallest factor that makes it dominate the Euclidean
/// distances: s = max over pairs of distance / ultrametric distance.
inline Normalized normalize(const Dendrogram& dendro, const PointSet& points)
{
    const std::size_t n = points.size();
    if (dendro.leaves() != n) {
        throw std::invalid_argument("normalize: dendrogram and point set sizes differ");
    }
    if (n < 2) {
        return {dendro, 1.0};
    }
    const double scale = detail::max_over_pairs(n, [&](index_t u, index_t v) {
        const double delta = dendro.distance(u, v);
        if (!(delta > 0.0)) {
            throw std::domain_error("normalize: zero ultrametric distance between distinct leaves "
                                    + std::to_string(u) + " and " + std::to_string(v));
        }
        return detail::distance_unchecked(points, u, v) / delta;
    });
    return {dendro.scaled(scale), scale};
}

/// Re-expands a dendrogram fitted on deduplicated points to the original indexing:
/// duplicates first merge at height 0, then the fitted merges replay on representatives.
inline Dendrogram expand_duplicates(const Dendrogram& dendro, const std::vector<std::vector<index_t>>& members)
{
    if (members.size() != dendro.leaves()) {
        throw std::invalid_argument("expand_duplicates: member list does not match leaf count");
    }
    std::size_t total = 0;
    for (const auto& m : members) {
        total += m.size();
    }
    std::vector<LeafMerge> merges;
    merges.reserve(total - 1);
    for (const auto& m : members) {
        for (std::size_t k = 1; k < m.size(); ++k) {
            merges.push_back({m[0], m[k], 0.0});
        }
    }
    const std::size_t n = dendro.leaves();
    std::vector<index_t> rep(2 * n - 1);
    for (index_t i = 0; i < n; ++i) {
        rep[i] = members[i].front();
    }
    for (std::size_t k = 0; k < dendro.merges().size(); ++k) {
        const auto& r = dendro.merges()[k];
        merges.push_back({rep[r.left], rep[r.right], r.height});
        rep[n + k] = rep[r.left];
    }
    return Dendrogram::from_merges(total, merges);
}

/// Shortest decimal form that reads back to the same double.
inline std::string format_number(double x)
{
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, res.ptr);
}

/// As format_number, but integral values keep a trailing ".0" ("3.0", not "3").
inline std::string format_height(double x)
{
    std::string s = format_number(x);
    if (s.find_first_of(".eEn") == std::string::npos) {
        s += ".0";
    }
    return s;
}

inline std::vector<MergeRow> to_merge_list(const Dendrogram& dendro) { return dendro.merges(); }

/// Rows "left right height size", one per line.
inline void write_merge_list(std::ostream& os, const Dendrogram& dendro)
{
    for (const auto& r : dendro.merges()) {
        os << r.left << ' ' << r.right << ' ' << format_height(r.height) << ' ' << r.size << '\n';
    }
}

/// Newick text; a child's branch length is its parent's height minus its own. Leaves are
/// labelled by index when `labels` is empty.
inline std::string to_newick(const Dendrogram& dendro, std::span<const std::string> labels = {})
{
    const std::size_t n = dendro.leaves();
    if (!labels.empty() && labels.size() != n) {
        throw std::invalid_argument("to_newick: label count does not match leaf count");
    }
    auto label = [&](index_t leaf) { return labels.empty() ? std::to_string(leaf) : labels[leaf]; };
    if (n == 1) {
        return label(0) + ";";
    }
    std::string out;
    // (node, stage): stage 0 = open, 1 = between children, 2 = close
    std::vector<std::pair<index_t, int>> stack{{dendro.root(), 0}};
    auto emit_branch = [&](index_t child, index_t parent) {
        out += ':';
        out += format_number(dendro.height(parent) - dendro.height(child));
    };
    std::vector<index_t> parent(2 * n - 1, dendro.root());
    for (std::size_t k = 0; k < dendro.merges().size(); ++k) {
        parent[dendro.merges()[k].left] = n + k;
        parent[dendro.merges()[k].right] = n + k;
    }
    while (!stack.empty()) {
        auto [node, stage] = stack.back();
        stack.pop_back();
        if (dendro.is_leaf(node)) {
            out += label(node);
            emit_branch(node, parent[node]);
            continue;
        }
        const auto& r = dendro.merges()[node - n];
        if (stage == 0) {
            out += '(';
            stack.emplace_back(node, 1);
            stack.emplace_back(r.left, 0);
        } else if (stage == 1) {
            out += ',';
            stack.emplace_back(node, 2);
            stack.emplace_back(r.right, 0);
        } else {
            out += ')';
            if (node != dendro.root()) {
                emit_branch(node, parent[node]);
            }
        }
    }
    out += ';';
    return out;
}

} // namespace ultrafit
