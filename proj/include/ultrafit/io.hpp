#pragma once

// Text formats: CSV point ingestion and merge-list parsing. Numbers are parsed with
// std::from_chars, so the decimal separator is always '.' whatever the locale.

#include "core.hpp"
#include "dendro.hpp"

#include <charconv>
#include <istream>
#include <optional>
#include <string>
#include <string_view>

namespace ultrafit {

class ParseError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct CsvTable {
    std::vector<double> values; // row-major
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<std::string> header; // empty when the file has none
};

namespace detail {

inline std::string_view trim(std::string_view s) noexcept
{
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) {
        s.remove_prefix(1);
    }
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
        s.remove_suffix(1);
    }
    return s;
}

inline std::optional<double> parse_double(std::string_view s) noexcept
{
    s = trim(s);
    if (!s.empty() && s.front() == '+') {
        s.remove_prefix(1);
    }
    if (s.empty()) {
        return std::nullopt;
    }
    double value = 0.0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
    if (ec != std::errc{} || ptr != s.data() + s.size() || !std::isfinite(value)) {
        return std::nullopt;
    }
    return value;
}

inline std::optional<std::size_t> parse_index(std::string_view s) noexcept
{
    s = trim(s);
    std::size_t value = 0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
    if (s.empty() || ec != std::errc{} || ptr != s.data() + s.size()) {
        return std::nullopt;
    }
    return value;
}

inline std::vector<std::string_view> split(std::string_view line, char sep)
{
    std::vector<std::string_view> fields;
    std::size_t start = 0;
    while (true) {
        const auto pos = line.find(sep, start);
        fields.push_back(line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
        if (pos == std::string_view::npos) {
            break;
        }
        start = pos + 1;
    }
    return fields;
}

inline std::vector<std::string_view> split_whitespace(std::string_view line)
{
    std::vector<std::string_view> fields;
    std::size_t i = 0;
    while (i < line.size()) {
        while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) {
            ++i;
        }
        const std::size_t start = i;
        while (i < line.size() && line[i] != ' ' && line[i] != '\t' && line[i] != '\r') {
            ++i;
        }
        if (i > start) {
            fields.push_back(line.substr(start, i - start));
        }
    }
    return fields;
}

} // namespace detail

/// Comma-separated numeric table. A first row with any non-numeric field is taken as a
/// header. Blank lines are skipped; LF and CRLF line endings are both accepted.
inline CsvTable read_csv(std::istream& in)
{
    CsvTable table;
    std::string line;
    std::size_t line_no = 0;
    bool first = true;
    while (std::getline(in, line)) {
        ++line_no;
        if (line_no == 1 && line.starts_with("\xEF\xBB\xBF")) {
            line.erase(0, 3);
        }
        if (detail::trim(line).empty()) {
            continue;
        }
        const auto fields = detail::split(line, ',');
        std::vector<double> row;
        row.reserve(fields.size());
        std::optional<std::size_t> bad_column;
        for (std::size_t c = 0; c < fields.size(); ++c) {
            const auto v = detail::parse_double(fields[c]);
            if (!v) {
                bad_column = c;
                break;
            }
            row.push_back(*v);
        }
        if (first) {
            first = false;
            if (bad_column) {
                for (auto f : fields) {
                    table.header.emplace_back(detail::trim(f));
                }
                table.cols = fields.size();
                continue;
            }
        }
        if (bad_column) {
            throw ParseError("csv: row " + std::to_string(line_no) + ", column " + std::to_string(*bad_column + 1)
                             + ": cannot parse '" + std::string(detail::trim(fields[*bad_column]))
                             + "' as a finite number");
        }
        if (table.cols == 0) {
            table.cols = row.size();
        } else if (row.size() != table.cols) {
            throw ParseError("csv: row " + std::to_string(line_no) + " has " + std::to_string(row.size())
                             + " columns, expected " + std::to_string(table.cols));
        }
        table.values.insert(table.values.end(), row.begin(), row.end());
        ++table.rows;
    }
    return table;
}

inline PointSet to_points(const CsvTable& table) { return PointSet(table.values, table.cols); }

/// Parses rows "left right height size"; blank lines are skipped.
inline std::vector<MergeRow> read_merge_list(std::istream& in)
{
    std::vector<MergeRow> rows;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto fields = detail::split_whitespace(line);
        if (fields.empty()) {
            continue;
        }
        auto fail = [&](const std::string& what) {
            return ParseError("merge list: line " + std::to_string(line_no) + ": " + what);
        };
        if (fields.size() != 4) {
            throw fail("expected 4 columns, found " + std::to_string(fields.size()));
        }
        const auto left = detail::parse_index(fields[0]);
        const auto right = detail::parse_index(fields[1]);
        const auto height = detail::parse_double(fields[2]);
        const auto size = detail::parse_index(fields[3]);
        if (!left || !right || !height || !size) {
            throw fail("malformed row '" + line + "'");
        }
        rows.push_back({*left, *right, *height, *size});
    }
    return rows;
}

} // namespace ultrafit
