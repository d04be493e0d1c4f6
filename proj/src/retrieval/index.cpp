#include "nugget/retrieval/index.hpp"

#include <algorithm>
#include <mutex>
#include <numeric>

#include "nugget/core/error.hpp"
#include "nugget/core/jsonl.hpp"

namespace nugget::retrieval {

namespace {

double dot(const Embedding& a, const Embedding& b) {
  if (a.size() != b.size())
    throw Error(ErrorCode::EmbeddingServiceUnavailable, "embedding dimension changed between calls");
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) sum += static_cast<double>(a[i]) * b[i];
  return std::clamp(sum, -1.0, 1.0);
}

}  // namespace

VectorIndex::VectorIndex(std::shared_ptr<Embedder> embedder) : embedder_(std::move(embedder)) {
  if (!embedder_) throw Error(ErrorCode::ConfigError, "index needs an embedder");
}

std::size_t VectorIndex::add(std::span<const Passage> passages) {
  std::vector<const Passage*> fresh;
  {
    std::shared_lock lock(mutex_);
    std::unordered_map<std::string, bool> batch_ids;
    for (const auto& p : passages)
      if (!by_id_.contains(p.id) && batch_ids.emplace(p.id, true).second) fresh.push_back(&p);
  }
  if (fresh.empty()) return 0;
  std::vector<std::string> texts;
  texts.reserve(fresh.size());
  for (const auto* p : fresh) texts.push_back(p->text);
  auto vectors = embedder_->embed(texts);
  if (vectors.size() != fresh.size())
    throw Error(ErrorCode::EmbeddingServiceUnavailable, "embedder returned the wrong number of vectors");

  std::unique_lock lock(mutex_);
  std::size_t inserted = 0;
  for (std::size_t i = 0; i < fresh.size(); ++i) {
    if (by_id_.contains(fresh[i]->id)) continue;
    normalize(vectors[i]);
    by_id_.emplace(fresh[i]->id, entries_.size());
    entries_.push_back({*fresh[i], std::move(vectors[i])});
    ++inserted;
  }
  return inserted;
}

std::vector<RetrievalHit> VectorIndex::search(const std::string& query, std::size_t k) const {
  if (k == 0) throw Error(ErrorCode::ConfigError, "search needs k >= 1");
  {
    std::shared_lock lock(mutex_);
    if (entries_.empty()) return {};
  }
  auto q = embedder_->embed(std::span<const std::string>(&query, 1)).at(0);
  normalize(q);

  std::shared_lock lock(mutex_);
  std::vector<std::pair<double, std::size_t>> scored;
  scored.reserve(entries_.size());
  for (std::size_t i = 0; i < entries_.size(); ++i) scored.emplace_back(dot(q, entries_[i].vector), i);
  const std::size_t take = std::min(k, scored.size());
  std::partial_sort(scored.begin(), scored.begin() + static_cast<std::ptrdiff_t>(take), scored.end(),
                    [](const auto& a, const auto& b) { return a.first > b.first || (a.first == b.first && a.second < b.second); });
  std::vector<RetrievalHit> hits;
  hits.reserve(take);
  for (std::size_t i = 0; i < take; ++i) {
    Passage p = entries_[scored[i].second].passage;
    p.score = scored[i].first;
    hits.push_back({std::move(p), scored[i].first});
  }
  return hits;
}

std::optional<double> VectorIndex::score(const std::string& query, const std::string& passage_id) const {
  const std::pair<std::string, std::string> pair{query, passage_id};
  return scores(std::span(&pair, 1)).front();
}

std::vector<std::optional<double>> VectorIndex::scores(
    std::span<const std::pair<std::string, std::string>> query_passage) const {
  std::vector<std::string> queries;
  queries.reserve(query_passage.size());
  for (const auto& [q, id] : query_passage) queries.push_back(q);
  auto vectors = embedder_->embed(queries);
  std::shared_lock lock(mutex_);
  std::vector<std::optional<double>> out;
  out.reserve(query_passage.size());
  for (std::size_t i = 0; i < query_passage.size(); ++i) {
    auto it = by_id_.find(query_passage[i].second);
    if (it == by_id_.end()) {
      out.emplace_back();
      continue;
    }
    normalize(vectors[i]);
    out.emplace_back(dot(vectors[i], entries_[it->second].vector));
  }
  return out;
}

std::size_t VectorIndex::size() const {
  std::shared_lock lock(mutex_);
  return entries_.size();
}

std::optional<Passage> VectorIndex::find(const std::string& passage_id) const {
  std::shared_lock lock(mutex_);
  auto it = by_id_.find(passage_id);
  if (it == by_id_.end()) return std::nullopt;
  return entries_[it->second].passage;
}

std::vector<Passage> VectorIndex::passages() const {
  std::shared_lock lock(mutex_);
  std::vector<Passage> out;
  out.reserve(entries_.size());
  for (const auto& e : entries_) out.push_back(e.passage);
  return out;
}

void VectorIndex::save(const std::filesystem::path& path) const {
  std::vector<Json> records;
  {
    std::shared_lock lock(mutex_);
    for (const auto& e : entries_)
      records.push_back(Json{{"passage", e.passage}, {"embedding", e.vector}, {"embedder", embedder_->name()}});
  }
  jsonl::write(path, records);
}

std::unique_ptr<VectorIndex> VectorIndex::load(const std::filesystem::path& path, std::shared_ptr<Embedder> embedder) {
  auto index = std::make_unique<VectorIndex>(std::move(embedder));
  for (const auto& record : jsonl::read(path)) {
    try {
      const auto name = record.at("embedder").get<std::string>();
      if (name != index->embedder_->name())
        throw Error(ErrorCode::ConfigError, path.string() + " was built with embedder '" + name + "', not '" +
                                                index->embedder_->name() + "'");
      auto passage = record.at("passage").get<Passage>();
      auto vector = record.at("embedding").get<Embedding>();
      if (index->by_id_.contains(passage.id)) continue;
      index->by_id_.emplace(passage.id, index->entries_.size());
      index->entries_.push_back({std::move(passage), std::move(vector)});
    } catch (const Json::exception& e) {
      throw Error(ErrorCode::SchemaViolation, path.string() + ": " + e.what());
    }
  }
  return index;
}

}  // namespace nugget::retrieval
