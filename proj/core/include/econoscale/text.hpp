#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace econoscale {

/// Shortest decimal text that round-trips to the same double.
std::string format_number(double value);

std::optional<double> parse_number(std::string_view text);

/// Splits one CSV record on commas and trims ASCII whitespace around fields.
std::vector<std::string_view> split_fields(std::string_view line);

std::string_view trim(std::string_view text);

}  // namespace econoscale
