#include "tubekit/text.hpp"

#include <cassert>
#include <charconv>
#include <cmath>

namespace tubekit {

std::string format_real(double value) {
    assert(std::isfinite(value));
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof(buf), value);
    return std::string(buf, res.ptr);
}

bool parse_real(std::string_view token, double& out) {
    if (token.empty()) return false;
    double v = 0.0;
    const char* first = token.data();
    const char* last = token.data() + token.size();
    const auto res = std::from_chars(first, last, v);
    if (res.ec != std::errc() || res.ptr != last) return false;
    if (!std::isfinite(v)) return false;  // from_chars accepts "inf"/"nan"
    out = v;
    return true;
}

bool parse_int(std::string_view token, std::int64_t& out) {
    if (token.empty()) return false;
    std::int64_t v = 0;
    const auto res = std::from_chars(token.data(), token.data() + token.size(), v);
    if (res.ec != std::errc() || res.ptr != token.data() + token.size()) return false;
    out = v;
    return true;
}

bool parse_uint(std::string_view token, std::uint64_t& out) {
    if (token.empty()) return false;
    std::uint64_t v = 0;
    const auto res = std::from_chars(token.data(), token.data() + token.size(), v);
    if (res.ec != std::errc() || res.ptr != token.data() + token.size()) return false;
    out = v;
    return true;
}

std::vector<std::string_view> split_tabs(std::string_view line) {
    std::vector<std::string_view> fields;
    std::size_t start = 0;
    while (true) {
        const std::size_t tab = line.find('\t', start);
        if (tab == std::string_view::npos) {
            fields.push_back(line.substr(start));
            break;
        }
        fields.push_back(line.substr(start, tab - start));
        start = tab + 1;
    }
    return fields;
}

}  // namespace tubekit
