#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace dtr::text {

// Shortest decimal string that parses back to the same double.
std::string format_double(double v);

double parse_double(std::string_view s);   // throws on trailing garbage
long long parse_int(std::string_view s);
unsigned long long parse_uint(std::string_view s);

std::vector<std::string> split(std::string_view s, char sep);
std::string_view trim(std::string_view s);

}  // namespace dtr::text
