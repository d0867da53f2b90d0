#pragma once

#include <ultrafit/ultrafit.hpp>

#include <random>

namespace ultrafit::testing {

inline PointSet uniform_points(std::size_t n, std::size_t d, std::uint64_t seed)
{
    std::mt19937_64 gen(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::vector<double> coords(n * d);
    for (auto& x : coords) {
        x = unit(gen);
    }
    return PointSet(std::move(coords), d);
}

inline PointSet collinear() { return PointSet::from_rows({{0, 0}, {1, 0}, {3, 0}}); }

/// Unit-side equilateral triangle whose three side lengths are bit-identical.
inline PointSet equilateral()
{
    const double c = std::sqrt(0.5);
    return PointSet::from_rows({{c, 0, 0}, {0, c, 0}, {0, 0, c}});
}

inline PointSet unit_square() { return PointSet::from_rows({{0, 0}, {1, 0}, {1, 1}, {0, 1}}); }

inline std::vector<index_t> random_permutation(std::size_t n, std::uint64_t seed)
{
    std::vector<index_t> perm(n);
    std::iota(perm.begin(), perm.end(), index_t{0});
    std::mt19937_64 gen(seed);
    std::shuffle(perm.begin(), perm.end(), gen);
    return perm;
}

/// Max edge weight on the tree path between every pair, by DFS from each source.
inline std::vector<double> tree_path_max(const SpanningTree& tree)
{
    const std::size_t n = tree.size();
    std::vector<double> out(n * n, 0.0);
    for (index_t s = 0; s < n; ++s) {
        std::vector<index_t> stack{s};
        std::vector<bool> seen(n, false);
        seen[s] = true;
        while (!stack.empty()) {
            const index_t x = stack.back();
            stack.pop_back();
            for (const auto& [y, w] : tree.neighbours(x)) {
                if (!seen[y]) {
                    seen[y] = true;
                    out[s * n + y] = std::max(out[s * n + x], w);
                    stack.push_back(y);
                }
            }
        }
    }
    return out;
}

/// Strong triangle inequality over all triples, with relative slack.
inline bool strong_triangle_holds(const Dendrogram& dendro, double slack = 1e-12)
{
    const std::size_t n = dendro.leaves();
    std::vector<double> dist(n * n);
    for (index_t x = 0; x < n; ++x) {
        for (index_t y = 0; y < n; ++y) {
            dist[x * n + y] = dendro.distance(x, y);
        }
    }
    for (index_t x = 0; x < n; ++x) {
        for (index_t y = x + 1; y < n; ++y) {
            const double dxy = dist[x * n + y];
            for (index_t z = 0; z < n; ++z) {
                if (dxy > std::max(dist[x * n + z], dist[z * n + y]) * (1.0 + slack)) {
                    return false;
                }
            }
        }
    }
    return true;
}

} // namespace ultrafit::testing
