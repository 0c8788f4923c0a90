#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace tubekit {

// Shortest decimal form that parses back to the same double. Callers must
// pass finite values.
std::string format_real(double value);

// Strict parsers: the whole token must be consumed and the result finite.
bool parse_real(std::string_view token, double& out);
bool parse_int(std::string_view token, std::int64_t& out);
bool parse_uint(std::string_view token, std::uint64_t& out);

std::vector<std::string_view> split_tabs(std::string_view line);

}  // namespace tubekit
