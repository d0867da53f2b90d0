#include "ultrafit_cli.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <sys/wait.h>

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

class Cli : public ::testing::Test {
protected:
    void SetUp() override
    {
        dir_ = fs::temp_directory_path()
               / ("ultrafit_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
        fs::remove_all(dir_);
        fs::create_directories(dir_);
    }

    void TearDown() override { fs::remove_all(dir_); }

    std::string file(const std::string& name, const std::string& content)
    {
        const auto path = dir_ / name;
        std::ofstream(path, std::ios::binary) << content;
        return path.string();
    }

    std::string path(const std::string& name) const { return (dir_ / name).string(); }

    static std::string slurp(const std::string& p)
    {
        std::ifstream in(p, std::ios::binary);
        return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
    }

    int run(std::vector<std::string> args)
    {
        args.insert(args.begin(), "ultrafit");
        std::vector<const char*> argv;
        for (const auto& a : args) {
            argv.push_back(a.c_str());
        }
        out_.str("");
        err_.str("");
        return ultrafit::cli::run_cli(static_cast<int>(argv.size()), argv.data(), out_, err_);
    }

    fs::path dir_;
    std::ostringstream out_, err_;
};

const std::string collinear_csv = "0,0\n1,0\n3,0\n";

std::string random_csv(std::size_t n, std::size_t d, std::uint64_t seed)
{
    std::mt19937_64 gen(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::string text;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t k = 0; k < d; ++k) {
            text += (k ? "," : "") + ultrafit::format_number(unit(gen));
        }
        text += "\n";
    }
    return text;
}

json without_timings(const std::string& text)
{
    auto j = json::parse(text);
    j.erase("stage_timings_ms");
    return j;
}

} // namespace

TEST_F(Cli, FitExactCollinearMerges)
{
    const auto in = file("pts.csv", collinear_csv);
    const auto out = path("tree.txt");
    ASSERT_EQ(run({"fit", "--input", in, "--algo", "exact", "--format", "merges", "--out", out}), 0) << err_.str();
    EXPECT_EQ(slurp(out), "0 1 1.0 2\n3 2 3.0 3\n");
    const auto stats = json::parse(slurp(out + ".stats.json"));
    EXPECT_EQ(stats["n"], 3);
    EXPECT_EQ(stats["d"], 2);
    EXPECT_EQ(stats["algorithm"], "exact");
    EXPECT_EQ(stats["gamma"], 2.5);
    EXPECT_EQ(stats["seed"], 0);
    EXPECT_TRUE(stats["stage_timings_ms"].contains("mst"));
    EXPECT_TRUE(stats["stage_timings_ms"].contains("cutweight"));
    EXPECT_TRUE(stats["stage_timings_ms"].contains("cartesian"));
    EXPECT_FALSE(stats.contains("max_distortion"));
}

TEST_F(Cli, FitToStdout)
{
    const auto in = file("pts.csv", collinear_csv);
    ASSERT_EQ(run({"fit", "--input", in, "--algo", "exact", "--format", "newick"}), 0);
    EXPECT_EQ(out_.str(), "((0:1,1:1):2,2:3);\n");
}

TEST_F(Cli, FitJsonFormat)
{
    const auto in = file("pts.csv", collinear_csv);
    ASSERT_EQ(run({"fit", "--input", in, "--algo", "single", "--format", "json"}), 0);
    const auto j = json::parse(out_.str());
    EXPECT_EQ(j["n"], 3);
    EXPECT_EQ(j["merges"], json::parse("[[0,1,1.0,2],[3,2,2.0,3]]"));
}

TEST_F(Cli, EmptyCsvExitsFour)
{
    EXPECT_EQ(run({"fit", "--input", file("empty.csv", "")}), 4);
    EXPECT_EQ(run({"fit", "--input", file("header.csv", "x,y\n")}), 4);
}

TEST_F(Cli, MalformedCsvExitsTwo)
{
    EXPECT_EQ(run({"fit", "--input", file("bad.csv", "1,2\n3,oops\n")}), 2);
    EXPECT_NE(err_.str().find("row 2, column 2"), std::string::npos) << err_.str();
    EXPECT_EQ(run({"fit", "--input", path("missing.csv")}), 2);
}

TEST_F(Cli, UnknownAlgorithmOrFormatExitsThree)
{
    const auto in = file("pts.csv", collinear_csv);
    EXPECT_EQ(run({"fit", "--input", in, "--algo", "median"}), 3);
    EXPECT_EQ(run({"fit", "--input", in, "--format", "xml"}), 3);
    EXPECT_EQ(run({"compare", "--input", in, "--algos", "exact,bogus"}), 3);
}

TEST_F(Cli, UsageErrors)
{
    EXPECT_EQ(run({"fit"}), 1);
    EXPECT_EQ(run({}), 1);
    EXPECT_EQ(run({"fit", "--input", file("pts.csv", collinear_csv), "--gamma", "0.5"}), 1);
    EXPECT_EQ(run({"--help"}), 0);
    EXPECT_NE(out_.str().find("fit"), std::string::npos);
}

TEST_F(Cli, ApproxRunsAreByteIdentical)
{
    const auto in = file("pts.csv", random_csv(300, 5, 1));
    const auto a = path("a.txt"), b = path("b.txt");
    ASSERT_EQ(run({"fit", "--input", in, "--algo", "approx", "--seed", "7", "--out", a}), 0);
    ASSERT_EQ(run({"fit", "--input", in, "--algo", "approx", "--seed", "7", "--out", b}), 0);
    EXPECT_EQ(slurp(a), slurp(b));
    EXPECT_EQ(without_timings(slurp(a + ".stats.json")), without_timings(slurp(b + ".stats.json")));
    EXPECT_EQ(json::parse(slurp(a + ".stats.json"))["seed"], 7);
}

TEST_F(Cli, DuplicatesReExpandAtExport)
{
    const auto in = file("dup.csv", "0,0\n1,0\n0,0\n3,0\n");
    ASSERT_EQ(run({"fit", "--input", in, "--algo", "exact", "--format", "merges", "--out", path("t.txt")}), 0);
    std::ifstream tree(path("t.txt"));
    const auto d = ultrafit::Dendrogram::from_rows(4, ultrafit::read_merge_list(tree));
    EXPECT_EQ(d.distance(0, 2), 0.0);
    EXPECT_EQ(d.distance(0, 1), 1.0);
    EXPECT_EQ(d.distance(2, 3), 3.0);
    const auto stats = json::parse(slurp(path("t.txt.stats.json")));
    EXPECT_EQ(stats["n"], 4);
    EXPECT_EQ(stats["distinct"], 3);
}

TEST_F(Cli, NormalizeAndDistortionInSidecar)
{
    const auto in = file("pts.csv", collinear_csv);
    const auto out = path("t.txt");
    ASSERT_EQ(run({"fit", "--input", in, "--algo", "single", "--normalize", "--distortion", "--out", out}), 0);
    EXPECT_EQ(slurp(out), "0 1 1.5 2\n3 2 3.0 3\n");
    const auto stats = json::parse(slurp(out + ".stats.json"));
    EXPECT_EQ(stats["scale"], 1.5);
    EXPECT_EQ(stats["max_distortion"], 1.5);
}

TEST_F(Cli, WardRecordsHeightConvention)
{
    const auto in = file("pts.csv", collinear_csv);
    ASSERT_EQ(run({"fit", "--input", in, "--algo", "ward", "--out", path("w.txt")}), 0);
    const auto stats = json::parse(slurp(path("w.txt.stats.json")));
    EXPECT_NE(stats["height_convention"].get<std::string>().find("sqrt"), std::string::npos);
}

TEST_F(Cli, CompareAllAlgorithmsCollinear)
{
    const auto in = file("pts.csv", collinear_csv);
    const auto out = path("cmp.json");
    ASSERT_EQ(run({"compare", "--input", in, "--out", out}), 0) << err_.str();
    const auto doc = json::parse(slurp(out));
    ASSERT_EQ(doc["rows"].size(), 7u);
    std::map<std::string, double> by_algo;
    for (const auto& row : doc["rows"]) {
        by_algo[row["algorithm"]] = row["max_distortion"];
    }
    EXPECT_EQ(by_algo["exact"], 1.5);
    EXPECT_EQ(by_algo["single"], 1.5);
    EXPECT_NE(out_.str().find("algorithm"), std::string::npos);
    EXPECT_NE(out_.str().find("exact"), std::string::npos);
}

TEST_F(Cli, CompareOneAlgorithm)
{
    const auto in = file("pts.csv", collinear_csv);
    const auto out = path("cmp.json");
    ASSERT_EQ(run({"compare", "--input", in, "--algos", "average", "--out", out}), 0);
    const auto doc = json::parse(slurp(out));
    ASSERT_EQ(doc["rows"].size(), 1u);
    EXPECT_EQ(doc["rows"][0]["algorithm"], "average");
}

TEST_F(Cli, EvalRoundTripReproducesFitDistortion)
{
    const auto in = file("pts.csv", random_csv(250, 4, 3));
    for (const std::string algo : {"approx", "acc", "average"}) {
        const auto out = path(algo + ".txt");
        ASSERT_EQ(run({"fit", "--input", in, "--algo", algo, "--normalize", "--distortion", "--out", out}), 0);
        const auto stats = json::parse(slurp(out + ".stats.json"));
        ASSERT_EQ(run({"eval", "--input", in, "--dendrogram", out}), 0) << err_.str();
        const auto report = json::parse(out_.str());
        EXPECT_EQ(report["max_distortion"].get<double>(), stats["max_distortion"].get<double>()) << algo;
    }
}

TEST_F(Cli, EvalWithDuplicates)
{
    const auto in = file("dup.csv", "0,0\n1,0\n0,0\n3,0\n");
    const auto out = path("t.txt");
    ASSERT_EQ(run({"fit", "--input", in, "--algo", "exact", "--out", out}), 0);
    ASSERT_EQ(run({"eval", "--input", in, "--dendrogram", out}), 0) << err_.str();
    const auto report = json::parse(out_.str());
    EXPECT_EQ(report["max_distortion"], 1.5);
    EXPECT_EQ(report["argmax"], json::parse("[1,3]"));
}

TEST_F(Cli, EvalTruncatedFileExitsTwo)
{
    const auto in = file("pts.csv", collinear_csv);
    EXPECT_EQ(run({"eval", "--input", in, "--dendrogram", file("t.txt", "0 1 1.0 2\n3 2 3.0")}), 2);
    EXPECT_EQ(run({"eval", "--input", in, "--dendrogram", path("absent.txt")}), 2);
}

TEST_F(Cli, EvalNonMonotoneExitsTwo)
{
    const auto in = file("pts.csv", collinear_csv);
    EXPECT_EQ(run({"eval", "--input", in, "--dendrogram", file("t.txt", "0 1 2.0 2\n3 2 1.0 3\n")}), 2);
    EXPECT_NE(err_.str().find("monotone"), std::string::npos) << err_.str();
}

TEST_F(Cli, EvalLeafMismatchExitsFive)
{
    const auto in = file("pts.csv", collinear_csv);
    EXPECT_EQ(run({"eval", "--input", in, "--dendrogram", file("t.txt", "0 1 1.0 2\n")}), 5);
}

TEST_F(Cli, BinaryPropagatesExitCodes)
{
    const auto in = file("empty.csv", "");
    const std::string cmd = std::string(ULTRAFIT_CLI_PATH) + " fit --input " + in + " 2>/dev/null";
    const int status = std::system(cmd.c_str());
    ASSERT_TRUE(WIFEXITED(status));
    EXPECT_EQ(WEXITSTATUS(status), 4);
}
