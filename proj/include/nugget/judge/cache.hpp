#pragma once

#include <filesystem>
#include <mutex>
#include <optional>
#include <string>
#include <unordered_map>

#include "nugget/judge/exchange.hpp"

namespace nugget::judge {

// Key = sha256(model, rendered prompt, temperature[, sample index]).
std::string cache_key(std::string_view model, std::string_view prompt, double temperature, int sample = 0);

// Response cache. With a directory it is backed by an append-only JSONL file
// of JudgeExchange records (judge_cache.jsonl), loaded on construction.
class ResponseCache {
 public:
  ResponseCache() = default;
  explicit ResponseCache(const std::filesystem::path& directory);

  std::optional<JudgeExchange> get(const std::string& key) const;
  void put(const std::string& key, const JudgeExchange& exchange);
  std::size_t size() const;

 private:
  mutable std::mutex mutex_;
  std::unordered_map<std::string, JudgeExchange> entries_;
  std::optional<std::filesystem::path> file_;
};

}  // namespace nugget::judge
