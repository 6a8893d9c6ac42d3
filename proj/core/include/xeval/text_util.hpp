#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace xeval {

std::string_view trim(std::string_view s);
std::vector<std::string_view> split(std::string_view s, char sep);
std::string to_lower_ascii(std::string_view s);

// Shortest decimal text that parses back to the same double.
std::string format_double(double x);

// Fixed-point rendering with `decimals` digits after the point.
std::string format_fixed(double x, int decimals);

// Lowercase, every non-alphanumeric ASCII byte mapped to '_'.
std::string normalize_constant(std::string_view id);

}  // namespace xeval
