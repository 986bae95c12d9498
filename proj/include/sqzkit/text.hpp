#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace sqz {

std::string_view trim(std::string_view s);
std::vector<std::string_view> split(std::string_view s, char sep);

/// Whole-string parse; nullopt on trailing garbage or an empty string.
std::optional<double> parse_double(std::string_view s);

} // namespace sqz
