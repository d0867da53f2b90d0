#pragma once

// Command-line front end. run_cli is kept in a header so tests can drive it in-process.
//
// Exit codes: 0 ok, 1 usage or I/O error, 2 malformed CSV / merge list, 3 unknown
// algorithm or format, 4 no points, 5 leaf count mismatch.

#include <ultrafit/ultrafit.hpp>

#include <CLI11.hpp>
#include <json.hpp>

#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

namespace ultrafit::cli {

enum ExitCode : int {
    ok = 0,
    usage = 1,
    bad_input = 2,
    bad_choice = 3,
    no_points = 4,
    leaf_mismatch = 5,
};

/// Error carrying the exit code it maps to.
struct Failure {
    int code;
    std::string message;
};

enum class Format { merges, newick, json };

inline std::optional<Format> parse_format(std::string_view name) noexcept
{
    if (name == "merges") {
        return Format::merges;
    }
    if (name == "newick") {
        return Format::newick;
    }
    if (name == "json") {
        return Format::json;
    }
    return std::nullopt;
}

struct RunConfig {
    std::string input;
    std::string algorithm = "approx";
    double gamma = 2.5;
    std::uint64_t seed = 0;
    std::optional<std::size_t> reps;
    std::optional<std::size_t> projections;
    std::string out;
    std::string format = "merges";
    bool normalize = false;
    bool distortion = false;

    SpannerConfig spanner() const
    {
        SpannerConfig c;
        c.gamma = gamma;
        c.seed = seed;
        c.reps = reps;
        c.projections = projections;
        return c;
    }
};

inline const char* ward_convention =
    "sqrt of the Ward merge cost; Lance-Williams on squared Euclidean distances";

inline PointSet load_points(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw Failure{bad_input, "cannot open input '" + path + "'"};
    }
    CsvTable table;
    try {
        table = read_csv(in);
    } catch (const ParseError& e) {
        throw Failure{bad_input, path + ": " + e.what()};
    }
    if (table.rows == 0) {
        throw Failure{no_points, path + ": no data rows"};
    }
    return to_points(table);
}

inline Algorithm require_algorithm(const std::string& name)
{
    const auto algo = parse_algorithm(name);
    if (!algo) {
        throw Failure{bad_choice, "unknown algorithm '" + name
                                      + "' (expected approx, acc, exact, single, complete, average, ward)"};
    }
    return *algo;
}

inline Format require_format(const std::string& name)
{
    const auto format = parse_format(name);
    if (!format) {
        throw Failure{bad_choice, "unknown format '" + name + "' (expected merges, newick, json)"};
    }
    return *format;
}

inline nlohmann::ordered_json dendrogram_json(const Dendrogram& dendro)
{
    nlohmann::ordered_json merges = nlohmann::ordered_json::array();
    for (const auto& r : dendro.merges()) {
        merges.push_back({r.left, r.right, r.height, r.size});
    }
    return {{"n", dendro.leaves()}, {"merges", std::move(merges)}};
}

inline nlohmann::ordered_json timings_json(const std::vector<StageTiming>& timings)
{
    nlohmann::ordered_json out = nlohmann::ordered_json::object();
    for (const auto& t : timings) {
        out[t.name] = t.ms;
    }
    return out;
}

inline void write_file(const std::string& path, const std::string& text)
{
    std::ofstream out(path, std::ios::binary);
    out << text;
    if (!out) {
        throw Failure{usage, "cannot write '" + path + "'"};
    }
}

inline int run_fit(const RunConfig& config, std::ostream& out)
{
    const Algorithm algo = require_algorithm(config.algorithm);
    const Format format = require_format(config.format);
    const PointSet points = load_points(config.input);
    const Deduplicated distinct = dedupe(points);

    FitResult result = fit(distinct.points, algo, config.spanner());
    Dendrogram fitted = result.dendrogram;
    std::optional<double> scale;
    if (config.normalize) {
        auto normalized = normalize(fitted, distinct.points);
        fitted = std::move(normalized.dendrogram);
        scale = normalized.scale;
    }
    std::optional<DistortionReport> report;
    if (config.distortion) {
        report = distortion(distinct.points, fitted, false, std::string(to_string(algo)));
    }
    const Dendrogram exported = distinct.has_duplicates() ? expand_duplicates(fitted, distinct.members) : fitted;

    std::string text;
    switch (format) {
    case Format::merges: {
        std::ostringstream os;
        write_merge_list(os, exported);
        text = os.str();
        break;
    }
    case Format::newick:
        text = to_newick(exported) + "\n";
        break;
    case Format::json:
        text = dendrogram_json(exported).dump(2) + "\n";
        break;
    }

    nlohmann::ordered_json stats;
    stats["n"] = points.size();
    stats["distinct"] = distinct.points.size();
    stats["d"] = points.dim();
    stats["algorithm"] = to_string(algo);
    stats["gamma"] = config.gamma;
    stats["seed"] = config.seed;
    if (algo == Algorithm::approx) {
        stats["spanner_edges"] = result.spanner_edges;
    }
    stats["stage_timings_ms"] = timings_json(result.timings);
    if (report) {
        stats["max_distortion"] = report->max_ratio;
    }
    if (scale) {
        stats["scale"] = *scale;
    }
    if (algo == Algorithm::ward) {
        stats["height_convention"] = ward_convention;
    }

    if (config.out.empty()) {
        out << text;
    } else {
        write_file(config.out, text);
        write_file(config.out + ".stats.json", stats.dump(2) + "\n");
    }
    return ok;
}

struct CompareConfig {
    RunConfig run;
    std::vector<std::string> algorithms;
};

inline int run_compare(const CompareConfig& config, std::ostream& out)
{
    std::vector<Algorithm> algos;
    if (config.algorithms.empty()) {
        algos.assign(all_algorithms.begin(), all_algorithms.end());
    }
    for (const auto& name : config.algorithms) {
        algos.push_back(require_algorithm(name));
    }
    const PointSet points = load_points(config.run.input);
    const Deduplicated distinct = dedupe(points);

    nlohmann::ordered_json rows = nlohmann::ordered_json::array();
    out << std::left << std::setw(10) << "algorithm" << std::right << std::setw(16) << "max_distortion"
        << std::setw(14) << "scale" << std::setw(12) << "time_ms" << '\n';
    for (Algorithm algo : algos) {
        const auto start = std::chrono::steady_clock::now();
        FitResult result = fit(distinct.points, algo, config.run.spanner());
        const auto stop = std::chrono::steady_clock::now();
        const double ms = std::chrono::duration<double, std::milli>(stop - start).count();
        const auto report = distortion(distinct.points, result.dendrogram, true, std::string(to_string(algo)));

        out << std::left << std::setw(10) << to_string(algo) << std::right << std::fixed << std::setprecision(4)
            << std::setw(16) << report.max_ratio << std::setw(14) << report.scale << std::setprecision(1)
            << std::setw(12) << ms << '\n';
        out.unsetf(std::ios::floatfield);

        nlohmann::ordered_json row;
        row["algorithm"] = to_string(algo);
        row["max_distortion"] = report.max_ratio;
        row["mean_distortion"] = report.mean_ratio;
        row["scale"] = report.scale;
        row["time_ms"] = ms;
        row["stage_timings_ms"] = timings_json(result.timings);
        if (algo == Algorithm::ward) {
            row["height_convention"] = ward_convention;
        }
        rows.push_back(std::move(row));
    }
    if (!config.run.out.empty()) {
        nlohmann::ordered_json doc;
        doc["n"] = points.size();
        doc["distinct"] = distinct.points.size();
        doc["d"] = points.dim();
        doc["gamma"] = config.run.gamma;
        doc["seed"] = config.run.seed;
        doc["rows"] = std::move(rows);
        write_file(config.run.out, doc.dump(2) + "\n");
    }
    return ok;
}

struct EvalConfig {
    std::string input;
    std::string dendrogram;
    bool normalize = false;
};

inline int run_eval(const EvalConfig& config, std::ostream& out)
{
    const PointSet points = load_points(config.input);
    std::ifstream in(config.dendrogram, std::ios::binary);
    if (!in) {
        throw Failure{bad_input, "cannot open merge list '" + config.dendrogram + "'"};
    }
    Dendrogram dendro;
    try {
        auto rows = read_merge_list(in);
        const std::size_t leaves = rows.size() + 1;
        dendro = Dendrogram::from_rows(leaves, std::move(rows));
    } catch (const ParseError& e) {
        throw Failure{bad_input, config.dendrogram + ": " + e.what()};
    } catch (const DendrogramError& e) {
        throw Failure{bad_input, config.dendrogram + ": " + e.what()};
    }
    if (dendro.leaves() != points.size()) {
        throw Failure{leaf_mismatch, "merge list has " + std::to_string(dendro.leaves()) + " leaves but '"
                                         + config.input + "' has " + std::to_string(points.size()) + " rows"};
    }
    const Deduplicated distinct = dedupe(points);
    std::vector<index_t> reps;
    reps.reserve(distinct.members.size());
    for (const auto& m : distinct.members) {
        reps.push_back(m.front());
    }
    const Dendrogram restricted = distinct.has_duplicates() ? dendro.restrict_to(reps) : dendro;
    const auto report = distortion(distinct.points, restricted, config.normalize);

    nlohmann::ordered_json doc;
    doc["n"] = points.size();
    doc["distinct"] = distinct.points.size();
    doc["max_distortion"] = report.max_ratio;
    doc["min_distortion"] = report.min_ratio;
    doc["mean_distortion"] = report.mean_ratio;
    doc["argmax"] = {reps[report.argmax.first], reps[report.argmax.second]};
    doc["scale"] = report.scale;
    out << doc.dump(2) << '\n';
    return ok;
}

inline void add_spanner_options(CLI::App& cmd, RunConfig& run)
{
    cmd.add_option("--gamma", run.gamma, "target spanner stretch (>= 1)")->capture_default_str();
    cmd.add_option("--seed", run.seed, "random seed")->capture_default_str();
    cmd.add_option("--reps", run.reps, "hash repetitions (default ceil(log2(n)^2))");
    cmd.add_option("--projections", run.projections, "projections per hash (default ceil(log2(n)/gamma))");
}

/// Parses argv and runs the chosen subcommand. Diagnostics go to `err`.
inline int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err)
{
    CLI::App app{"ultrafit: fit ultrametrics to Euclidean point sets"};
    app.require_subcommand(1);

    RunConfig fit_config;
    auto* fit_cmd = app.add_subcommand("fit", "fit one algorithm and export the dendrogram");
    fit_cmd->add_option("--input", fit_config.input, "CSV of points, one per row")->required();
    fit_cmd->add_option("--algo", fit_config.algorithm, "approx|acc|exact|single|complete|average|ward")
        ->capture_default_str();
    add_spanner_options(*fit_cmd, fit_config);
    fit_cmd->add_option("--format", fit_config.format, "merges|newick|json")->capture_default_str();
    fit_cmd->add_option("--out", fit_config.out, "output path (stdout when omitted; sidecar <out>.stats.json)");
    fit_cmd->add_flag("--normalize", fit_config.normalize, "scale so the ultrametric dominates distances");
    fit_cmd->add_flag("--distortion", fit_config.distortion, "report max distortion in the sidecar");

    CompareConfig compare_config;
    auto* compare_cmd = app.add_subcommand("compare", "normalized max distortion and time per algorithm");
    compare_cmd->add_option("--input", compare_config.run.input, "CSV of points")->required();
    compare_cmd->add_option("--algos", compare_config.algorithms, "algorithms to run (default all)")
        ->delimiter(',');
    add_spanner_options(*compare_cmd, compare_config.run);
    compare_cmd->add_option("--out", compare_config.run.out, "write the table as JSON");

    EvalConfig eval_config;
    auto* eval_cmd = app.add_subcommand("eval", "distortion of a merge list against its points");
    eval_cmd->add_option("--input", eval_config.input, "CSV of points")->required();
    eval_cmd->add_option("--dendrogram", eval_config.dendrogram, "merge list file")->required();
    eval_cmd->add_flag("--normalize", eval_config.normalize, "normalize before measuring");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) {
            out << app.help();
            return ok;
        }
        err << "error: " << e.what() << '\n';
        return usage;
    }

    try {
        if (fit_cmd->parsed()) {
            return run_fit(fit_config, out);
        }
        if (compare_cmd->parsed()) {
            return run_compare(compare_config, out);
        }
        return run_eval(eval_config, out);
    } catch (const Failure& f) {
        err << "error: " << f.message << '\n';
        return f.code;
    } catch (const std::invalid_argument& e) {
        err << "error: " << e.what() << '\n';
        return usage;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return usage;
    }
}

} // namespace ultrafit::cli
