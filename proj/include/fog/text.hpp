#pragma once

#include <charconv>
#include <cstdint>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "fog/error.hpp"

namespace fog {

// Shortest decimal form that parses back to the same double. Never uses
// locale, so output is stable across platforms.
inline std::string format_double(double v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

inline std::string format_float(float v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

// Parses a full cell as a double; the entire cell must be consumed.
inline double parse_double(std::string_view cell, std::string_view what) {
    double out = 0.0;
    auto res = std::from_chars(cell.data(), cell.data() + cell.size(), out);
    if (res.ec != std::errc() || res.ptr != cell.data() + cell.size()) {
        throw DataError("malformed " + std::string(what) + " value '" + std::string(cell) + "'");
    }
    return out;
}

inline std::int64_t parse_int(std::string_view cell, std::string_view what) {
    std::int64_t out = 0;
    auto res = std::from_chars(cell.data(), cell.data() + cell.size(), out);
    if (res.ec != std::errc() || res.ptr != cell.data() + cell.size()) {
        throw DataError("malformed " + std::string(what) + " value '" + std::string(cell) + "'");
    }
    return out;
}

inline std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

// Splits one line on commas. No quoting: cells in this format are plain
// numerics or identifiers.
inline std::vector<std::string_view> split_csv_line(std::string_view line) {
    std::vector<std::string_view> cells;
    std::size_t begin = 0;
    while (true) {
        std::size_t comma = line.find(',', begin);
        if (comma == std::string_view::npos) {
            cells.push_back(line.substr(begin));
            break;
        }
        cells.push_back(line.substr(begin, comma - begin));
        begin = comma + 1;
    }
    return cells;
}

// Splits text into lines on '\n', dropping a trailing '\r' per line and a
// final empty line from a trailing newline.
inline std::vector<std::string_view> split_lines(std::string_view text) {
    std::vector<std::string_view> lines;
    std::size_t begin = 0;
    while (begin <= text.size()) {
        std::size_t nl = text.find('\n', begin);
        std::string_view line;
        if (nl == std::string_view::npos) {
            line = text.substr(begin);
            begin = text.size() + 1;
        } else {
            line = text.substr(begin, nl - begin);
            begin = nl + 1;
        }
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        lines.push_back(line);
    }
    if (!lines.empty() && lines.back().empty()) lines.pop_back();
    return lines;
}

// Splits on runs of spaces and tabs; no empty fields are produced.
inline std::vector<std::string_view> split_whitespace(std::string_view s) {
    std::vector<std::string_view> fields;
    std::size_t i = 0;
    while (i < s.size()) {
        while (i < s.size() && (s[i] == ' ' || s[i] == '\t')) ++i;
        std::size_t begin = i;
        while (i < s.size() && s[i] != ' ' && s[i] != '\t') ++i;
        if (i > begin) fields.push_back(s.substr(begin, i - begin));
    }
    return fields;
}

}  // namespace fog
