#pragma once

#include <functional>
#include <string>
#include <string_view>
#include <vector>

namespace hinscreen::tsv {

// Splits on '\t' only; fields keep embedded spaces. An empty line yields
// one empty field, matching the "N+1 fields for N tabs" rule.
std::vector<std::string_view> split(std::string_view line);

// Calls fn(line_number, line) for every line, 1-based, with the trailing
// '\r' of CRLF files stripped. Throws std::runtime_error if the file
// cannot be opened.
void for_each_line(const std::string& path,
                   const std::function<void(std::size_t, std::string_view)>& fn);

// Shortest decimal form that round-trips a double ("%.17g" fallback).
std::string format_double(double v);

// Fixed-precision form for report tables.
std::string format_fixed(double v, int precision);

// Strict full-string numeric parses; nullopt on trailing garbage.
bool parse_double(std::string_view text, double& out);
bool parse_int64(std::string_view text, long long& out);

}  // namespace hinscreen::tsv
