#include "support.hpp"

#include <gtest/gtest.h>

#include <cstdlib>

using namespace ultrafit;
using ultrafit::testing::collinear;
using ultrafit::testing::equilateral;
using ultrafit::testing::uniform_points;

namespace {

std::vector<std::string> stage_names(const FitResult& r)
{
    std::vector<std::string> names;
    for (const auto& t : r.timings) {
        names.push_back(t.name);
        EXPECT_GE(t.ms, 0.0);
    }
    return names;
}

double max_distortion(const PointSet& p, const Dendrogram& d) { return distortion(p, d, false).max_ratio; }

void expect_dominates(const PointSet& p, const Dendrogram& d)
{
    for (index_t u = 0; u < p.size(); ++u) {
        for (index_t v = u + 1; v < p.size(); ++v) {
            ASSERT_GE(d.distance(u, v), distance(p, u, v)) << u << "," << v;
        }
    }
}

} // namespace

TEST(ApproxUlt, CollinearOnCompleteGraph)
{
    const auto p = collinear();
    const auto t = kruskal(complete_graph(p));
    const auto d = build_dendrogram(t, approximate_cut_weights(p, t));
    EXPECT_EQ(d.distance(0, 1), 5.0);
    EXPECT_EQ(d.distance(0, 2), 15.0);
    EXPECT_EQ(d.distance(1, 2), 15.0);
    // tight bound for pair (1, 2): 15 <= 5 * 1 * 1.5 * 2
    EXPECT_LE(d.distance(1, 2), 5.0 * kt_factor(p, t) * brute_force_opt_alpha(p) * distance(p, 1, 2));
}

TEST(ApproxUlt, CollinearAnySeed)
{
    const auto p = collinear();
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        SpannerConfig c;
        c.seed = seed;
        const auto r = approx_ult(p, c);
        EXPECT_EQ(r.dendrogram.distance(0, 1), 5.0);
        EXPECT_EQ(r.dendrogram.distance(0, 2), 15.0);
        EXPECT_EQ(r.dendrogram.distance(1, 2), 15.0);
    }
}

TEST(ApproxUlt, SinglePoint)
{
    const auto r = approx_ult(PointSet::from_rows({{1.0, 1.0}}), {});
    EXPECT_EQ(r.dendrogram.leaves(), 1u);
    EXPECT_TRUE(r.dendrogram.merges().empty());
}

TEST(ApproxUlt, TwoPointsFiveTimesDistance)
{
    const auto p = PointSet::from_rows({{0.0}, {0.4}});
    const auto r = approx_ult(p, {});
    EXPECT_EQ(r.dendrogram.distance(0, 1), 5.0 * 0.4);
}

TEST(ApproxUlt, StagesAndMetadata)
{
    SpannerConfig c;
    c.gamma = 2.5;
    c.seed = 11;
    const auto r = approx_ult(uniform_points(200, 3, 1), c);
    EXPECT_EQ(stage_names(r), (std::vector<std::string>{"spanner", "mst", "cutweight", "cartesian"}));
    EXPECT_EQ(r.algorithm, Algorithm::approx);
    EXPECT_EQ(r.gamma, 2.5);
    EXPECT_EQ(r.seed, 11u);
    EXPECT_GT(r.spanner_edges, 199u);
    ASSERT_TRUE(r.tree.has_value());
    EXPECT_EQ(r.heights.size(), 199u);
}

TEST(ApproxUlt, RejectsInvalidConfig)
{
    SpannerConfig c;
    c.gamma = 0.0;
    EXPECT_THROW(approx_ult(collinear(), c), std::invalid_argument);
}

TEST(ApproxUlt, CertifiedBoundAndLowerBound)
{
    for (std::uint64_t seed = 0; seed < 8; ++seed) {
        const auto p = uniform_points(60 + 25 * seed, 2 + seed % 6, 300 + seed);
        SpannerConfig c;
        c.gamma = 2.0;
        c.seed = seed;
        const auto r = approx_ult(p, c);
        const double gamma_emp = kt_factor(p, *r.tree);
        const double alpha_opt = max_distortion(p, farach_exact(p).dendrogram);
        for (index_t u = 0; u < p.size(); ++u) {
            for (index_t v = u + 1; v < p.size(); ++v) {
                const double w = distance(p, u, v);
                const double delta = r.dendrogram.distance(u, v);
                ASSERT_GE(delta, w);
                ASSERT_LE(delta, 5.0 * gamma_emp * alpha_opt * w * (1 + 1e-12));
            }
        }
    }
}

TEST(ApproxUlt, DeterministicAcrossThreadCounts)
{
    const auto p = uniform_points(800, 6, 2);
    SpannerConfig c;
    c.seed = 7;
    ::setenv("ULTRAFIT_THREADS", "1", 1);
    const auto a = approx_ult(p, c);
    ::setenv("ULTRAFIT_THREADS", "3", 1);
    const auto b = approx_ult(p, c);
    ::unsetenv("ULTRAFIT_THREADS");
    const auto again = approx_ult(p, c);
    EXPECT_EQ(a.dendrogram.merges(), b.dendrogram.merges());
    EXPECT_EQ(a.dendrogram.merges(), again.dendrogram.merges());
}

TEST(ApproxAccUlt, Collinear)
{
    const auto d = approx_acc_ult(collinear()).dendrogram;
    EXPECT_EQ(d.distance(0, 1), 5.0);
    EXPECT_EQ(d.distance(1, 2), 15.0);
}

TEST(ApproxAccUlt, EquilateralFiveTimesSide)
{
    const auto p = equilateral();
    const auto d = approx_acc_ult(p).dendrogram;
    const double side = distance(p, 0, 1);
    EXPECT_EQ(d.distance(0, 1), 5.0 * side);
    EXPECT_EQ(d.distance(0, 2), 5.0 * side);
    EXPECT_EQ(d.distance(1, 2), 5.0 * side);
}

TEST(ApproxAccUlt, TwoPoints)
{
    const auto p = PointSet::from_rows({{1.0, 1.0}, {1.0, 3.0}});
    EXPECT_EQ(approx_acc_ult(p).dendrogram.distance(0, 1), 10.0);
}

TEST(ApproxAccUlt, WithinFiveOfOptimum)
{
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const auto p = uniform_points(50 + 20 * seed, 1 + seed % 8, seed);
        const auto acc = approx_acc_ult(p);
        EXPECT_EQ(stage_names(acc), (std::vector<std::string>{"mst", "cutweight", "cartesian"}));
        expect_dominates(p, acc.dendrogram);
        const double opt = max_distortion(p, farach_exact(p).dendrogram);
        EXPECT_LE(max_distortion(p, acc.dendrogram), 5.0 * opt * (1 + 1e-12));
    }
}

TEST(FarachExact, Collinear)
{
    const auto p = collinear();
    const auto d = farach_exact(p).dendrogram;
    EXPECT_EQ(d.distance(0, 1), 1.0);
    EXPECT_EQ(d.distance(0, 2), 3.0);
    EXPECT_EQ(d.distance(1, 2), 3.0);
    EXPECT_EQ(max_distortion(p, d), 1.5);
}

TEST(FarachExact, EquilateralIsometric)
{
    const auto p = equilateral();
    EXPECT_EQ(max_distortion(p, farach_exact(p).dendrogram), 1.0);
}

TEST(FarachExact, MatchesOracle)
{
    std::mt19937_64 gen(1234);
    for (int k = 0; k < 100; ++k) {
        const std::size_t n = 3 + static_cast<std::size_t>(gen() % 5);
        const std::size_t d = std::array<std::size_t, 3>{1, 2, 8}[gen() % 3];
        const auto p = uniform_points(n, d, gen());
        const double exact = max_distortion(p, farach_exact(p).dendrogram);
        const double oracle = brute_force_opt_alpha(p);
        ASSERT_NEAR(exact, oracle, 1e-9 * oracle) << "instance " << k;
    }
}

TEST(FarachExact, NoWorseThanAnyOtherFit)
{
    SpannerConfig c;
    c.gamma = 2.0;
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const auto p = uniform_points(40 + 15 * seed, 1 + seed % 5, 900 + seed);
        const auto exact = farach_exact(p).dendrogram;
        expect_dominates(p, exact);
        const double opt = max_distortion(p, exact);
        for (auto algo : all_algorithms) {
            c.seed = seed;
            const auto d = fit(p, algo, c).dendrogram;
            EXPECT_LE(opt, distortion(p, d, true).max_ratio * (1 + 1e-12)) << to_string(algo);
        }
    }
}

TEST(Oracle, Examples)
{
    EXPECT_NEAR(brute_force_opt_alpha(collinear()), 1.5, 1e-15);
    EXPECT_EQ(brute_force_opt_alpha(equilateral()), 1.0);
    EXPECT_EQ(brute_force_opt_alpha(PointSet::from_rows({{0.0}, {1.0}})), 1.0);
    EXPECT_EQ(brute_force_opt_alpha(PointSet::from_rows({{0.0}})), 1.0);
}

TEST(Oracle, RejectsLargeInput)
{
    EXPECT_THROW(brute_force_opt_alpha(uniform_points(8, 2, 1)), std::invalid_argument);
}

TEST(Fit, DispatchAndStages)
{
    const auto p = uniform_points(50, 3, 5);
    for (auto algo : all_algorithms) {
        const auto r = fit(p, algo);
        EXPECT_EQ(r.algorithm, algo);
        EXPECT_EQ(r.dendrogram.leaves(), 50u);
        EXPECT_TRUE(r.dendrogram.heights_monotone());
        const auto names = stage_names(r);
        if (algo == Algorithm::complete || algo == Algorithm::average || algo == Algorithm::ward) {
            EXPECT_EQ(names, (std::vector<std::string>{"linkage"}));
        } else if (algo == Algorithm::single) {
            EXPECT_EQ(names, (std::vector<std::string>{"mst", "cartesian"}));
        }
    }
}

TEST(Fit, ValidUltrametricsEverywhere)
{
    const auto p = uniform_points(200, 4, 6);
    for (auto algo : all_algorithms) {
        EXPECT_TRUE(ultrafit::testing::strong_triangle_holds(fit(p, algo).dendrogram)) << to_string(algo);
    }
}

TEST(Algorithm, ParseRoundTrip)
{
    for (auto algo : all_algorithms) {
        EXPECT_EQ(parse_algorithm(to_string(algo)), algo);
    }
    EXPECT_FALSE(parse_algorithm("median").has_value());
}
