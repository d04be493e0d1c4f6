#pragma once

#include <cstddef>
#include <string>
#include <string_view>

namespace nugget {

// Lowercase hex SHA-256 digest.
std::string sha256_hex(std::string_view data);

// First `hex_chars` characters of sha256_hex(data).
std::string short_hash(std::string_view data, std::size_t hex_chars = 16);

}  // namespace nugget
