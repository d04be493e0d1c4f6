#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "nugget/net/http.hpp"

namespace nugget::retrieval {

using Embedding = std::vector<float>;

class Embedder {
 public:
  virtual ~Embedder() = default;

  // One vector per input, in order. Throws EmbeddingServiceUnavailable.
  virtual std::vector<Embedding> embed(std::span<const std::string> texts) = 0;

  // Identifies the vector space; persisted indexes record it.
  virtual std::string name() const = 0;
};

// Deterministic offline embedder: signed feature hashing of lowercase word
// tokens into `dimension` buckets, L2-normalised. Texts sharing no words are
// (almost always) orthogonal; identical texts have cosine 1.
class HashEmbedder : public Embedder {
 public:
  explicit HashEmbedder(std::size_t dimension = 512);

  std::vector<Embedding> embed(std::span<const std::string> texts) override;
  std::string name() const override;

 private:
  std::size_t dimension_;
};

// Remote embedding service: POST {model, input:[...]} -> {data:[{embedding:[...]}]}.
class HttpEmbedder : public Embedder {
 public:
  explicit HttpEmbedder(net::HttpEndpoint endpoint, std::size_t batch_size = 64);

  std::vector<Embedding> embed(std::span<const std::string> texts) override;
  std::string name() const override { return "http:" + endpoint_.model_name; }

 private:
  net::HttpEndpoint endpoint_;
  std::size_t batch_size_;
};

// Scales to unit L2 norm in place; the zero vector is left alone.
void normalize(Embedding& v);

}  // namespace nugget::retrieval
