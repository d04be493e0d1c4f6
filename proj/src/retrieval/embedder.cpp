#include "nugget/retrieval/embedder.hpp"

#include <cctype>
#include <cmath>
#include <cstdint>

#include "nugget/core/error.hpp"
#include "nugget/core/json.hpp"

namespace nugget::retrieval {

namespace {

// FNV-1a; stable across platforms, unlike std::hash.
std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace

void normalize(Embedding& v) {
  double norm = 0.0;
  for (float x : v) norm += static_cast<double>(x) * x;
  if (norm <= 0.0) return;
  const double inv = 1.0 / std::sqrt(norm);
  for (float& x : v) x = static_cast<float>(x * inv);
}

HashEmbedder::HashEmbedder(std::size_t dimension) : dimension_(dimension) {
  if (dimension_ == 0) throw Error(ErrorCode::ConfigError, "hash embedder dimension must be positive");
}

std::string HashEmbedder::name() const { return "hash-" + std::to_string(dimension_); }

std::vector<Embedding> HashEmbedder::embed(std::span<const std::string> texts) {
  std::vector<Embedding> out;
  out.reserve(texts.size());
  for (const auto& text : texts) {
    Embedding v(dimension_, 0.0f);
    std::string token;
    auto flush = [&] {
      if (token.empty()) return;
      const auto h = fnv1a(token);
      v[h % dimension_] += (h >> 63) ? -1.0f : 1.0f;
      token.clear();
    };
    for (unsigned char c : text) {
      if (std::isalnum(c) || c >= 0x80)
        token += static_cast<char>(std::tolower(c));
      else
        flush();
    }
    flush();
    normalize(v);
    out.push_back(std::move(v));
  }
  return out;
}

HttpEmbedder::HttpEmbedder(net::HttpEndpoint endpoint, std::size_t batch_size)
    : endpoint_(std::move(endpoint)), batch_size_(batch_size == 0 ? 1 : batch_size) {
  net::parse_url(endpoint_.url);
}

std::vector<Embedding> HttpEmbedder::embed(std::span<const std::string> texts) {
  std::vector<Embedding> out;
  out.reserve(texts.size());
  for (std::size_t begin = 0; begin < texts.size(); begin += batch_size_) {
    const auto batch = texts.subspan(begin, std::min(batch_size_, texts.size() - begin));
    Json body{{"model", endpoint_.model_name}, {"input", Json(std::vector<std::string>(batch.begin(), batch.end()))}};
    const auto response = net::post_json(endpoint_, body.dump(), ErrorCode::EmbeddingServiceUnavailable);
    try {
      const auto data = Json::parse(response).at("data");
      if (!data.is_array() || data.size() != batch.size())
        throw Error(ErrorCode::EmbeddingServiceUnavailable,
                    "embedding service returned " + std::to_string(data.size()) + " vectors for " +
                        std::to_string(batch.size()) + " inputs");
      for (const auto& item : data) {
        auto v = item.at("embedding").get<Embedding>();
        normalize(v);
        out.push_back(std::move(v));
      }
    } catch (const Json::exception& e) {
      throw Error(ErrorCode::EmbeddingServiceUnavailable, std::string("malformed embedding response: ") + e.what());
    }
  }
  return out;
}

}  // namespace nugget::retrieval
