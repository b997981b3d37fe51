#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace transmod {

// Shortest round-trip decimal representation; NaN becomes "NA".
std::string format_double(double v);

// Fixed decimal places, for human-facing summaries (not for data files).
std::string format_fixed(double v, int digits);

// Strict full-string parse; leading/trailing blanks allowed, '+' tolerated.
bool parse_double(std::string_view s, double& out);

bool parse_long(std::string_view s, long& out);

std::string join(const std::vector<std::string>& parts, const std::string& sep);

}  // namespace transmod
