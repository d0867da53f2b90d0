#pragma once

#include "core.hpp"
#include "cutweight.hpp"
#include "dendro.hpp"
#include "linkage.hpp"
#include "mst.hpp"
#include "spanner.hpp"

#include <chrono>
#include <optional>
#include <string_view>

namespace ultrafit {

enum class Algorithm { approx, acc, exact, single, complete, average, ward };

inline constexpr std::array<Algorithm, 7> all_algorithms{Algorithm::approx,   Algorithm::acc,
                                                         Algorithm::exact,    Algorithm::single,
                                                         Algorithm::complete, Algorithm::average,
                                                         Algorithm::ward};

inline constexpr std::string_view to_string(Algorithm a) noexcept
{
    switch (a) {
    case Algorithm::approx:
        return "approx";
    case Algorithm::acc:
        return "acc";
    case Algorithm::exact:
        return "exact";
    case Algorithm::single:
        return "single";
    case Algorithm::complete:
        return "complete";
    case Algorithm::average:
        return "average";
    case Algorithm::ward:
        return "ward";
    }
    return "?";
}

inline std::optional<Algorithm> parse_algorithm(std::string_view name) noexcept
{
    for (Algorithm a : all_algorithms) {
        if (to_string(a) == name) {
            return a;
        }
    }
    return std::nullopt;
}

struct StageTiming {
    std::string name;
    double ms = 0.0;
};

struct FitResult {
    Dendrogram dendrogram;
    Algorithm algorithm = Algorithm::exact;
    double gamma = 1.0;
    std::uint64_t seed = 0;
    std::vector<StageTiming> timings;
    std::size_t spanner_edges = 0;
    /// Spanning tree and edge heights for the tree-based algorithms.
    std::optional<SpanningTree> tree;
    EdgeHeights heights;

    double total_ms() const noexcept
    {
        double total = 0.0;
        for (const auto& t : timings) {
            total += t.ms;
        }
        return total;
    }
};

namespace detail {

class StageClock {
public:
    explicit StageClock(std::vector<StageTiming>& out) : out_(&out) {}

    template <class F>
    auto run(std::string name, F&& f)
    {
        const auto start = std::chrono::steady_clock::now();
        auto result = f();
        const auto stop = std::chrono::steady_clock::now();
        out_->push_back({std::move(name), std::chrono::duration<double, std::milli>(stop - start).count()});
        return result;
    }

private:
    std::vector<StageTiming>* out_;
};

inline FitResult fit_from_tree(FitResult result, const PointSet& points, SpanningTree tree, bool exact_weights)
{
    detail::StageClock clock(result.timings);
    result.heights = clock.run("cutweight", [&] {
        return exact_weights ? exact_cut_weights(points, tree) : approximate_cut_weights(points, tree);
    });
    result.dendrogram = clock.run("cartesian", [&] { return build_dendrogram(tree, result.heights); });
    result.tree = std::move(tree);
    return result;
}

} // namespace detail

/// Spanner, Kruskal on the spanner, 5-estimate cut weights, cartesian tree.
inline FitResult approx_ult(const PointSet& points, const SpannerConfig& config)
{
    config.validate();
    FitResult result;
    result.algorithm = Algorithm::approx;
    result.gamma = config.gamma;
    result.seed = config.seed;
    detail::StageClock clock(result.timings);
    const SpannerGraph graph = clock.run("spanner", [&] { return build_spanner(points, config); });
    result.spanner_edges = graph.edges.size();
    SpanningTree tree = clock.run("mst", [&] {
        try {
            return kruskal(graph);
        } catch (const DisconnectedGraphError& err) {
            return connect_components(points, err.forest());
        }
    });
    return detail::fit_from_tree(std::move(result), points, std::move(tree), false);
}

/// Exact MST with 5-estimate cut weights.
inline FitResult approx_acc_ult(const PointSet& points)
{
    FitResult result;
    result.algorithm = Algorithm::acc;
    detail::StageClock clock(result.timings);
    SpanningTree tree = clock.run("mst", [&] { return exact_mst(points); });
    return detail::fit_from_tree(std::move(result), points, std::move(tree), false);
}

/// Optimal ultrametric: exact MST, exact cut weights.
inline FitResult farach_exact(const PointSet& points)
{
    FitResult result;
    result.algorithm = Algorithm::exact;
    detail::StageClock clock(result.timings);
    SpanningTree tree = clock.run("mst", [&] { return exact_mst(points); });
    return detail::fit_from_tree(std::move(result), points, std::move(tree), true);
}

inline FitResult fit(const PointSet& points, Algorithm algorithm, const SpannerConfig& config = {})
{
    switch (algorithm) {
    case Algorithm::approx:
        return approx_ult(points, config);
    case Algorithm::acc:
        return approx_acc_ult(points);
    case Algorithm::exact:
        return farach_exact(points);
    case Algorithm::single: {
        FitResult result;
        result.algorithm = algorithm;
        detail::StageClock clock(result.timings);
        SpanningTree tree = clock.run("mst", [&] { return exact_mst(points); });
        result.heights.reserve(tree.edges().size());
        for (const auto& e : tree.edges()) {
            result.heights.push_back(e.w);
        }
        result.dendrogram = clock.run("cartesian", [&] { return build_dendrogram(tree, result.heights); });
        result.tree = std::move(tree);
        return result;
    }
    case Algorithm::complete:
    case Algorithm::average:
    case Algorithm::ward: {
        const LinkageMethod method = algorithm == Algorithm::complete  ? LinkageMethod::complete
                                     : algorithm == Algorithm::average ? LinkageMethod::average
                                                                       : LinkageMethod::ward;
        FitResult result;
        result.algorithm = algorithm;
        detail::StageClock clock(result.timings);
        result.dendrogram = clock.run("linkage", [&] { return agglomerate(points, method); });
        return result;
    }
    }
    throw std::invalid_argument("fit: unknown algorithm");
}

} // namespace ultrafit
