#pragma once

// Multi-scale LSH star spanner.
//
// For every scale r and every repetition, points are hashed by k concatenated
// quantized random projections (Gaussian direction, uniform random offset, cell
// width gamma * r). Each non-empty bucket becomes a star rooted at its lowest
// index member. Projection directions are drawn once per repetition and shared
// by all scales of that repetition; offsets are drawn per (repetition, scale).
// A repetition stops descending at the first scale where every bucket is a
// singleton. The coarsest radius is at least the diameter, so that scale is a
// single bucket and is emitted once instead of being hashed.

#include "core.hpp"
#include "parallel.hpp"

#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <queue>
#include <random>

namespace ultrafit {

struct SpannerConfig {
    double gamma = 2.0;
    std::uint64_t seed = 0;
    std::optional<std::size_t> reps;        // hash repetitions per scale; default ceil(log2(n)^2)
    std::optional<std::size_t> projections; // concatenated projections; default ceil(log2(n) / gamma)
    std::size_t max_scales = 32;

    void validate() const
    {
        if (!(gamma >= 1.0) || !std::isfinite(gamma)) {
            throw std::invalid_argument("SpannerConfig: gamma must be a finite value >= 1");
        }
        if (reps && *reps == 0) {
            throw std::invalid_argument("SpannerConfig: reps must be >= 1");
        }
        if (projections && *projections == 0) {
            throw std::invalid_argument("SpannerConfig: projections must be >= 1");
        }
        if (max_scales == 0) {
            throw std::invalid_argument("SpannerConfig: max_scales must be >= 1");
        }
    }

    std::size_t resolved_projections(std::size_t n) const
    {
        if (projections) {
            return *projections;
        }
        const double lg = n > 1 ? std::log2(static_cast<double>(n)) : 0.0;
        return std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(lg / gamma)));
    }

    std::size_t resolved_reps(std::size_t n) const
    {
        if (reps) {
            return *reps;
        }
        const double lg = n > 1 ? std::log2(static_cast<double>(n)) : 0.0;
        return std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(lg * lg)));
    }
};

struct SpannerGraph {
    std::size_t n = 0;
    std::vector<WeightedEdge> edges; // sorted by (u, v), u < v, no duplicates
};

/// Complete graph over the points, mostly useful as a reference spanner of stretch 1.
inline SpannerGraph complete_graph(const PointSet& points)
{
    SpannerGraph g{points.size(), {}};
    for (index_t i = 0; i < points.size(); ++i) {
        for (index_t j = i + 1; j < points.size(); ++j) {
            g.edges.push_back({i, j, detail::distance_unchecked(points, i, j)});
        }
    }
    return g;
}

/// Radii r_0 > r_1 > ... with r_0 the bounding-box diagonal and ratio 1/2.
inline std::vector<double> estimate_scales(const PointSet& points, const SpannerConfig& config)
{
    config.validate();
    if (points.size() < 2) {
        return {};
    }
    std::vector<double> lo(points[0].begin(), points[0].end());
    std::vector<double> hi = lo;
    for (index_t i = 1; i < points.size(); ++i) {
        auto row = points[i];
        for (std::size_t k = 0; k < row.size(); ++k) {
            lo[k] = std::min(lo[k], row[k]);
            hi[k] = std::max(hi[k], row[k]);
        }
    }
    const double r0 = std::sqrt(squared_distance(lo, hi));
    std::vector<double> radii;
    if (!(r0 > 0.0)) {
        return radii;
    }
    const double floor_radius = std::ldexp(r0, -static_cast<int>(config.max_scales));
    double r = r0;
    for (std::size_t s = 0; s < config.max_scales && r >= floor_radius && r > 0.0; ++s) {
        radii.push_back(r);
        r *= 0.5;
    }
    return radii;
}

namespace detail {

inline std::uint64_t mix64(std::uint64_t x) noexcept
{
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Seed for an independent generator stream identified by (seed, tag, a, b).
inline std::uint64_t stream_seed(std::uint64_t seed, std::uint64_t tag, std::uint64_t a,
                                 std::uint64_t b = 0) noexcept
{
    return mix64(mix64(mix64(seed ^ mix64(tag)) ^ a) ^ (b * 0xd6e8feb86659fd93ULL));
}

inline std::int64_t floor_to_int(double x) noexcept
{
    const auto t = static_cast<std::int64_t>(x);
    return t - static_cast<std::int64_t>(x < static_cast<double>(t));
}

/// Star edges, encoded as u * n + v with u < v, produced by one repetition across all scales.
inline std::vector<std::uint64_t> repetition_edges(const PointSet& points, std::span<const double> radii,
                                                   double gamma, std::size_t k, std::uint64_t seed,
                                                   std::size_t rep)
{
    const std::size_t n = points.size();
    const std::size_t d = points.dim();

    std::mt19937_64 dir_gen(stream_seed(seed, 1, rep));
    std::normal_distribution<double> normal(0.0, 1.0);
    std::vector<double> dirs(k * d);
    for (auto& x : dirs) {
        x = normal(dir_gen);
    }
    std::vector<double> proj(n * k);
    for (index_t i = 0; i < n; ++i) {
        auto row = points[i];
        for (std::size_t j = 0; j < k; ++j) {
            double acc = 0.0;
            for (std::size_t c = 0; c < d; ++c) {
                acc += dirs[j * d + c] * row[c];
            }
            proj[i * k + j] = acc;
        }
    }

    // open-addressing table: cell hash -> lowest-index member
    std::size_t capacity = 16;
    while (capacity < 2 * n) {
        capacity <<= 1;
    }
    constexpr auto empty = std::numeric_limits<std::uint32_t>::max();
    std::vector<std::uint64_t> slot_hash(capacity);
    std::vector<std::uint32_t> slot_center(capacity);

    std::vector<std::uint64_t> out;
    std::vector<double> offsets(k);
    for (std::size_t s = 0; s < radii.size(); ++s) {
        const double width = gamma * radii[s];
        const double inv_width = 1.0 / width;
        std::mt19937_64 off_gen(stream_seed(seed, 2, rep, s));
        std::uniform_real_distribution<double> uniform(0.0, 1.0);
        // offsets in cell units
        for (auto& b : offsets) {
            b = uniform(off_gen);
        }
        std::fill(slot_center.begin(), slot_center.end(), empty);
        bool any_shared = false;
        for (index_t i = 0; i < n; ++i) {
            std::uint64_t h = 0x84222325cbf29ce4ULL;
            for (std::size_t j = 0; j < k; ++j) {
                const auto cell = floor_to_int(proj[i * k + j] * inv_width + offsets[j]);
                h = (h ^ static_cast<std::uint64_t>(cell)) * 0x9e3779b97f4a7c15ULL + j;
            }
            h = mix64(h);
            std::size_t pos = h & (capacity - 1);
            while (slot_center[pos] != empty && slot_hash[pos] != h) {
                pos = (pos + 1) & (capacity - 1);
            }
            if (slot_center[pos] == empty) {
                slot_hash[pos] = h;
                slot_center[pos] = static_cast<std::uint32_t>(i);
            } else {
                out.push_back(slot_center[pos] * n + i);
                any_shared = true;
            }
        }
        if (!any_shared) {
            break;
        }
    }
    return out;
}

} // namespace detail

/// Sparse graph whose shortest paths approximate Euclidean distances. Deterministic
/// given (points, config), independent of the worker count.
inline SpannerGraph build_spanner(const PointSet& points, const SpannerConfig& config)
{
    config.validate();
    const std::size_t n = points.size();
    SpannerGraph graph{n, {}};
    if (n < 2) {
        return graph;
    }
    if (n > (std::size_t{1} << 32)) {
        throw std::length_error("build_spanner: more than 2^32 points");
    }
    const auto radii = estimate_scales(points, config);
    const std::size_t k = config.resolved_projections(n);
    const std::size_t reps = config.resolved_reps(n);

    std::vector<std::vector<std::uint64_t>> per_rep(reps);
    if (!radii.empty()) {
        const auto finer = std::span<const double>(radii).subspan(1);
        parallel_blocks(
            reps,
            [&](std::size_t begin, std::size_t end) {
                for (std::size_t t = begin; t < end; ++t) {
                    per_rep[t] = detail::repetition_edges(points, finer, config.gamma, k, config.seed, t);
                }
            },
            1);
    }

    // first radix pass scatters straight out of the per-repetition buffers
    const int bits = static_cast<int>(std::bit_width(static_cast<std::uint64_t>(n) * n));
    const int low_bits = std::min(bits, std::min(16, (bits + 1) / 2));
    const std::uint64_t low_mask = (std::uint64_t{1} << low_bits) - 1;
    std::vector<std::size_t> count(std::size_t{1} << low_bits);
    for (index_t i = 1; i < n; ++i) {
        ++count[i & low_mask];
    }
    for (const auto& r : per_rep) {
        for (const auto key : r) {
            ++count[key & low_mask];
        }
    }
    std::size_t total = 0;
    for (auto& c : count) {
        total += std::exchange(c, total);
    }
    std::vector<std::uint64_t> keys(total);
    for (index_t i = 1; i < n; ++i) {
        keys[count[i & low_mask]++] = i;
    }
    for (auto& r : per_rep) {
        for (const auto key : r) {
            keys[count[key & low_mask]++] = key;
        }
        std::vector<std::uint64_t>().swap(r);
    }
    if (bits > low_bits) {
        detail::radix_sort_by(keys, [&](std::uint64_t x) { return x >> low_bits; }, bits - low_bits);
    }
    keys.erase(std::unique(keys.begin(), keys.end()), keys.end());

    graph.edges.resize(keys.size());
    for (std::size_t e = 0; e < keys.size(); ++e) {
        const index_t u = static_cast<index_t>(keys[e] / n);
        const index_t v = static_cast<index_t>(keys[e] % n);
        graph.edges[e] = {u, v, detail::distance_unchecked(points, u, v)};
    }
    return graph;
}

namespace detail {

struct Adjacency {
    std::vector<std::size_t> offsets;
    std::vector<std::pair<index_t, double>> targets;
};

inline Adjacency build_adjacency(std::size_t n, std::span<const WeightedEdge> edges)
{
    Adjacency adj;
    adj.offsets.assign(n + 1, 0);
    for (const auto& e : edges) {
        ++adj.offsets[e.u + 1];
        ++adj.offsets[e.v + 1];
    }
    for (std::size_t i = 0; i < n; ++i) {
        adj.offsets[i + 1] += adj.offsets[i];
    }
    adj.targets.resize(2 * edges.size());
    std::vector<std::size_t> cursor(adj.offsets.begin(), adj.offsets.end() - 1);
    for (const auto& e : edges) {
        adj.targets[cursor[e.u]++] = {e.v, e.w};
        adj.targets[cursor[e.v]++] = {e.u, e.w};
    }
    return adj;
}

inline std::vector<double> dijkstra(const Adjacency& adj, index_t source)
{
    const std::size_t n = adj.offsets.size() - 1;
    std::vector<double> dist(n, std::numeric_limits<double>::infinity());
    using item = std::pair<double, index_t>;
    std::priority_queue<item, std::vector<item>, std::greater<>> queue;
    dist[source] = 0.0;
    queue.emplace(0.0, source);
    while (!queue.empty()) {
        auto [du, u] = queue.top();
        queue.pop();
        if (du > dist[u]) {
            continue;
        }
        for (std::size_t a = adj.offsets[u]; a < adj.offsets[u + 1]; ++a) {
            const auto [v, w] = adj.targets[a];
            if (du + w < dist[v]) {
                dist[v] = du + w;
                queue.emplace(dist[v], v);
            }
        }
    }
    return dist;
}

} // namespace detail

inline bool is_connected(const SpannerGraph& graph)
{
    if (graph.n == 0) {
        return true;
    }
    UnionFind uf(graph.n);
    for (const auto& e : graph.edges) {
        uf.unite(e.u, e.v);
    }
    return uf.components() == 1;
}

/// Max over checked pairs of (shortest-path distance / Euclidean distance), at least 1.
/// All pairs are checked when `sample` covers them; otherwise `sample` random pairs.
/// Returns +infinity when the graph is disconnected.
inline double verify_stretch(const PointSet& points, const SpannerGraph& graph, std::size_t sample,
                             std::uint64_t seed = 0)
{
    const std::size_t n = points.size();
    if (graph.n != n) {
        throw std::invalid_argument("verify_stretch: graph and point set sizes differ");
    }
    if (!is_connected(graph)) {
        return std::numeric_limits<double>::infinity();
    }
    if (n < 2) {
        return 1.0;
    }
    const auto adj = detail::build_adjacency(n, graph.edges);
    const std::size_t total_pairs = n * (n - 1) / 2;

    // targets[source] lists the partner indices to check
    std::vector<std::vector<index_t>> targets(n);
    if (sample >= total_pairs) {
        for (index_t i = 0; i < n; ++i) {
            for (index_t j = i + 1; j < n; ++j) {
                targets[i].push_back(j);
            }
        }
    } else {
        std::mt19937_64 gen(detail::stream_seed(seed, 3, 0));
        std::uniform_int_distribution<index_t> pick(0, n - 1);
        for (std::size_t s = 0; s < sample; ++s) {
            index_t a = pick(gen), b = pick(gen);
            while (b == a) {
                b = pick(gen);
            }
            targets[std::min(a, b)].push_back(std::max(a, b));
        }
    }

    double worst = 1.0;
    for (index_t i = 0; i < n; ++i) {
        if (targets[i].empty()) {
            continue;
        }
        const auto dist = detail::dijkstra(adj, i);
        for (index_t j : targets[i]) {
            worst = std::max(worst, dist[j] / detail::distance_unchecked(points, i, j));
        }
    }
    return worst;
}

} // namespace ultrafit
