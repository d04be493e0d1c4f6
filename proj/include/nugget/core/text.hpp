#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace nugget::text {

std::string_view trim(std::string_view s) noexcept;
std::string to_lower(std::string_view s);

// Lowercase and collapse every whitespace run into a single space, trimmed.
std::string normalize_whitespace_lower(std::string_view s);

// Collapse whitespace runs into single spaces, trimmed; case preserved.
std::string collapse_whitespace(std::string_view s);

// Split on '\n' (a trailing '\r' is dropped from each line).
std::vector<std::string_view> split_lines(std::string_view s);

std::vector<std::string_view> split(std::string_view s, char delimiter);

bool starts_with_ci(std::string_view s, std::string_view prefix) noexcept;

}  // namespace nugget::text
