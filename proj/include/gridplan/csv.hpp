#pragma once

// Minimal strict CSV support. Comma separated, first row is the header,
// blank lines and lines starting with '#' are skipped. Numeric parsing is
// locale independent (std::from_chars / std::to_chars).

#include <charconv>
#include <cstdint>
#include <fstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace gridplan {

class CsvError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

namespace detail {

inline std::string_view trim(std::string_view s)
{
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) {
        s.remove_prefix(1);
    }
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
        s.remove_suffix(1);
    }
    return s;
}

} // namespace detail

struct CsvTable {
    std::string file;
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
    std::vector<std::size_t> line_numbers;

    int col(std::string_view name) const
    {
        for (std::size_t i = 0; i < header.size(); ++i) {
            if (header[i] == name) {
                return static_cast<int>(i);
            }
        }
        return -1;
    }

    int require_col(std::string_view name) const
    {
        int c = col(name);
        if (c < 0) {
            throw CsvError(file + ": missing required column '" + std::string(name) + "'");
        }
        return c;
    }

    std::string where(std::size_t row) const
    {
        return file + ":" + std::to_string(line_numbers[row]);
    }

    const std::string& cell(std::size_t row, int col) const { return rows[row][static_cast<std::size_t>(col)]; }
};

inline CsvTable read_csv(const std::string& path)
{
    std::ifstream in(path);
    if (!in) {
        throw CsvError("cannot open file: " + path);
    }
    CsvTable t;
    t.file = path;
    std::string line;
    std::size_t lineno = 0;
    bool have_header = false;
    while (std::getline(in, line)) {
        ++lineno;
        std::string_view sv = detail::trim(line);
        if (sv.empty() || sv.front() == '#') {
            continue;
        }
        std::vector<std::string> fields;
        std::size_t start = 0;
        const std::string raw(sv);
        for (std::size_t i = 0; i <= raw.size(); ++i) {
            if (i == raw.size() || raw[i] == ',') {
                fields.emplace_back(detail::trim(std::string_view(raw).substr(start, i - start)));
                start = i + 1;
            }
        }
        if (!have_header) {
            t.header = std::move(fields);
            have_header = true;
            continue;
        }
        if (fields.size() != t.header.size()) {
            throw CsvError(path + ":" + std::to_string(lineno) + ": expected " +
                           std::to_string(t.header.size()) + " fields, got " + std::to_string(fields.size()));
        }
        t.rows.push_back(std::move(fields));
        t.line_numbers.push_back(lineno);
    }
    if (!have_header) {
        throw CsvError(path + ": empty file (no header row)");
    }
    return t;
}

inline double parse_double(std::string_view cell, const std::string& where)
{
    cell = detail::trim(cell);
    double v = 0.0;
    auto [p, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
    if (ec != std::errc() || p != cell.data() + cell.size()) {
        throw CsvError(where + ": malformed number '" + std::string(cell) + "'");
    }
    return v;
}

inline long parse_int(std::string_view cell, const std::string& where)
{
    cell = detail::trim(cell);
    long v = 0;
    auto [p, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
    if (ec != std::errc() || p != cell.data() + cell.size()) {
        throw CsvError(where + ": malformed integer '" + std::string(cell) + "'");
    }
    return v;
}

inline bool parse_bool01(std::string_view cell, const std::string& where)
{
    cell = detail::trim(cell);
    if (cell == "0" || cell == "false") {
        return false;
    }
    if (cell == "1" || cell == "true") {
        return true;
    }
    throw CsvError(where + ": malformed boolean '" + std::string(cell) + "' (expected 0/1)");
}

// Shortest round-trip representation; stable across runs.
inline std::string fmt_double(double v)
{
    char buf[64];
    auto [p, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    (void)ec;
    return std::string(buf, p);
}

} // namespace gridplan
