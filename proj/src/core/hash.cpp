#include "nugget/core/hash.hpp"

#include <openssl/evp.h>

#include <array>
#include <stdexcept>

namespace nugget {

std::string sha256_hex(std::string_view data) {
  std::array<unsigned char, EVP_MAX_MD_SIZE> digest{};
  unsigned int length = 0;
  if (EVP_Digest(data.data(), data.size(), digest.data(), &length, EVP_sha256(), nullptr) != 1)
    throw std::runtime_error("sha256 digest failed");
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  out.reserve(length * 2);
  for (unsigned int i = 0; i < length; ++i) {
    out.push_back(kHex[digest[i] >> 4]);
    out.push_back(kHex[digest[i] & 0x0f]);
  }
  return out;
}

std::string short_hash(std::string_view data, std::size_t hex_chars) {
  return sha256_hex(data).substr(0, hex_chars);
}

}  // namespace nugget
