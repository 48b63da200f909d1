#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace lobsim::csv {

/// Splits on commas. No quoting; none of our files need it.
std::vector<std::string_view> split(std::string_view line, char sep = ',');

/// Empty fields parse as NaN. Throws std::invalid_argument on garbage.
double parse_double(std::string_view field);
std::int64_t parse_int(std::string_view field);

/// Shortest representation that parses back to the same double.
std::string format_double(double value);
void append_double(std::string& out, double value);

/// Strips a trailing '\r' (files written on Windows).
std::string_view trim_eol(std::string_view line);

}  // namespace lobsim::csv
