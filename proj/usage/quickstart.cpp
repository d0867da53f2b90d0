// Fit an ultrametric to random points with each algorithm and print its distortion.

#include <ultrafit/ultrafit.hpp>

#include <iostream>
#include <random>

int main()
{
    std::mt19937_64 gen(1);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::vector<double> coords(500 * 8);
    for (auto& x : coords) {
        x = normal(gen);
    }
    const ultrafit::PointSet points(std::move(coords), 8);

    ultrafit::SpannerConfig config;
    config.gamma = 2.5;
    config.seed = 7;
    for (auto algo : ultrafit::all_algorithms) {
        const auto result = ultrafit::fit(points, algo, config);
        const auto report = ultrafit::distortion(points, result.dendrogram, true);
        std::cout << ultrafit::to_string(algo) << ": max distortion " << report.max_ratio << " ("
                  << result.total_ms() << " ms)\n";
    }
}
