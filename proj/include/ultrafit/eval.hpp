#pragma once

#include "core.hpp"
#include "dendro.hpp"
#include "parallel.hpp"
#include "pipeline.hpp"

#include <chrono>

namespace ultrafit {

struct DistortionReport {
    double max_ratio = 0.0;
    double min_ratio = 0.0;
    double mean_ratio = 0.0;
    std::pair<index_t, index_t> argmax{0, 0};
    std::size_t n = 0;
    std::string algorithm;
    /// Factor applied by normalization (1 when not normalized).
    double scale = 1.0;
};

/// Exact max / min / mean of ultrametric distance over Euclidean distance across all
/// pairs. With `normalize_first`, the dendrogram is normalized before the scan.
/// Argmax ties resolve to the lexicographically smallest pair; the mean sums rows in
/// index order, so results do not depend on the worker count.
inline DistortionReport distortion(const PointSet& points, const Dendrogram& dendro, bool normalize_first,
                                   std::string algorithm = {})
{
    const std::size_t n = points.size();
    if (dendro.leaves() != n) {
        throw std::invalid_argument("distortion: dendrogram has " + std::to_string(dendro.leaves())
                                    + " leaves for " + std::to_string(n) + " points");
    }
    DistortionReport report;
    report.n = n;
    report.algorithm = std::move(algorithm);
    if (n < 2) {
        report.max_ratio = report.min_ratio = report.mean_ratio = 1.0;
        return report;
    }
    std::optional<Normalized> normalized;
    if (normalize_first) {
        normalized = normalize(dendro, points);
        report.scale = normalized->scale;
    }
    const Dendrogram& tree = normalized ? normalized->dendrogram : dendro;

    struct Row {
        double max = 0.0;
        index_t argmax = 0;
        double min = std::numeric_limits<double>::infinity();
        double sum = 0.0;
    };
    std::vector<Row> rows(n - 1);
    parallel_blocks(
        n - 1,
        [&](std::size_t begin, std::size_t end) {
            for (index_t u = begin; u < end; ++u) {
                Row& row = rows[u];
                row.max = -1.0;
                for (index_t v = u + 1; v < n; ++v) {
                    const double w = detail::distance_unchecked(points, u, v);
                    if (!(w > 0.0)) {
                        throw std::domain_error("distortion: points " + std::to_string(u) + " and "
                                                + std::to_string(v) + " coincide; dedupe the input first");
                    }
                    const double ratio = tree.distance(u, v) / w;
                    if (ratio > row.max) {
                        row.max = ratio;
                        row.argmax = v;
                    }
                    row.min = std::min(row.min, ratio);
                    row.sum += ratio;
                }
            }
        },
        16);

    report.max_ratio = -1.0;
    report.min_ratio = std::numeric_limits<double>::infinity();
    double sum = 0.0;
    for (index_t u = 0; u + 1 < n; ++u) {
        const Row& row = rows[u];
        if (row.max > report.max_ratio) {
            report.max_ratio = row.max;
            report.argmax = {u, row.argmax};
        }
        report.min_ratio = std::min(report.min_ratio, row.min);
        sum += row.sum;
    }
    report.mean_ratio = sum / (static_cast<double>(n) * static_cast<double>(n - 1) / 2.0);
    return report;
}

struct BenchmarkRow {
    Algorithm algorithm = Algorithm::approx;
    std::size_t repeats = 0;
    double mean_ms = 0.0;
    std::vector<StageTiming> stages; // per-stage means
};

/// Wall-clock time per algorithm, averaged over `repeats` runs. File I/O is excluded.
inline std::vector<BenchmarkRow> benchmark(const PointSet& points, std::span<const Algorithm> algorithms,
                                           std::size_t repeats, const SpannerConfig& config = {})
{
    if (repeats == 0) {
        throw std::invalid_argument("benchmark: repeats must be >= 1");
    }
    std::vector<BenchmarkRow> table;
    for (Algorithm algo : algorithms) {
        BenchmarkRow row;
        row.algorithm = algo;
        row.repeats = repeats;
        double total = 0.0;
        for (std::size_t r = 0; r < repeats; ++r) {
            const auto start = std::chrono::steady_clock::now();
            FitResult result = fit(points, algo, config);
            const auto stop = std::chrono::steady_clock::now();
            total += std::chrono::duration<double, std::milli>(stop - start).count();
            if (row.stages.empty()) {
                for (const auto& s : result.timings) {
                    row.stages.push_back({s.name, 0.0});
                }
            }
            for (std::size_t s = 0; s < row.stages.size() && s < result.timings.size(); ++s) {
                row.stages[s].ms += result.timings[s].ms;
            }
        }
        row.mean_ms = total / static_cast<double>(repeats);
        for (auto& s : row.stages) {
            s.ms /= static_cast<double>(repeats);
        }
        table.push_back(std::move(row));
    }
    return table;
}

} // namespace ultrafit
