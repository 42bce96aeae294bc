#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace cqs::io {

/// Shortest round-trip decimal representation; locale independent.
std::string format_number(double value);

/// Comma-separated row; empty strings encode undefined fields.
std::string join_row(const std::vector<std::string>& fields);

std::vector<std::string> split_row(std::string_view line);

double parse_number(std::string_view text);

}  // namespace cqs::io
