#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <shared_mutex>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "nugget/core/types.hpp"
#include "nugget/retrieval/embedder.hpp"

namespace nugget::retrieval {

struct RetrievalHit {
  Passage passage;
  double score = 0.0;
};

// Exact cosine-similarity index over unit-normalised vectors. Adding a
// passage whose id is already present is a no-op. Concurrent searches are
// allowed; ingestion takes the write lock.
class VectorIndex {
 public:
  explicit VectorIndex(std::shared_ptr<Embedder> embedder);

  // Returns the number of passages actually inserted.
  std::size_t add(std::span<const Passage> passages);

  // At most k hits, highest score first; equal scores keep insertion order.
  std::vector<RetrievalHit> search(const std::string& query, std::size_t k) const;

  // Cosine between `query` and an indexed passage, if the id is known.
  std::optional<double> score(const std::string& query, const std::string& passage_id) const;

  // Many queries at once; one embedding call for all of them.
  std::vector<std::optional<double>> scores(std::span<const std::pair<std::string, std::string>> query_passage) const;

  std::size_t size() const;
  std::optional<Passage> find(const std::string& passage_id) const;
  std::vector<Passage> passages() const;

  // JSONL of {passage, embedding, embedder}.
  void save(const std::filesystem::path& path) const;
  // Throws ConfigError if the file was built with a different embedder.
  static std::unique_ptr<VectorIndex> load(const std::filesystem::path& path, std::shared_ptr<Embedder> embedder);

 private:
  struct Entry {
    Passage passage;
    Embedding vector;
  };

  std::shared_ptr<Embedder> embedder_;
  mutable std::shared_mutex mutex_;
  std::vector<Entry> entries_;
  std::unordered_map<std::string, std::size_t> by_id_;
};

}  // namespace nugget::retrieval
