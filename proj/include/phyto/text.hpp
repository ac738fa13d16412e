#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace phyto {

/// Shortest decimal form that parses back to the identical double.
std::string format_double(double value);

/// Fixed-point form with the given number of decimals.
std::string format_fixed(double value, int decimals);

std::optional<double> parse_double(std::string_view text);
std::optional<long long> parse_int(std::string_view text);

std::vector<std::string_view> split(std::string_view text, char sep);
std::string_view trim(std::string_view text);

std::string join(const std::vector<std::string>& parts, std::string_view sep);

}  // namespace phyto
