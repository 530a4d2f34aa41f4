#pragma once

// Small helpers shared by the text formats (manifest, scene, model, reports).

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace gazelab::textio {

/// Shortest decimal form that parses back to the identical double.
std::string format_double(double value);
/// Fixed-point form with the given number of decimals.
std::string format_fixed(double value, int decimals);

/// Whole-token parses; empty on any trailing garbage.
std::optional<double> parse_double(std::string_view token);
std::optional<long long> parse_int(std::string_view token);

std::vector<std::string_view> split(std::string_view line, char sep);
std::vector<std::string_view> split_whitespace(std::string_view line);

}  // namespace gazelab::textio
