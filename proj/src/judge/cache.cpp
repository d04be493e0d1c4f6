#include "nugget/judge/cache.hpp"

#include <cstdio>
#include <fstream>

#include "nugget/core/error.hpp"
#include "nugget/core/hash.hpp"
#include "nugget/core/jsonl.hpp"

namespace nugget::judge {

namespace {
constexpr const char* kCacheFile = "judge_cache.jsonl";
}

std::string cache_key(std::string_view model, std::string_view prompt, double temperature, int sample) {
  char temp[64];
  std::snprintf(temp, sizeof temp, "%.17g", temperature);
  std::string material;
  material.reserve(model.size() + prompt.size() + 64);
  material.append(model).append(1, '\0').append(prompt).append(1, '\0').append(temp);
  if (sample > 0) material.append(1, '\0').append(std::to_string(sample));
  return sha256_hex(material);
}

ResponseCache::ResponseCache(const std::filesystem::path& directory) {
  std::filesystem::create_directories(directory);
  file_ = directory / kCacheFile;
  if (!std::filesystem::exists(*file_)) return;
  for (const auto& record : jsonl::read(*file_)) {
    auto key = record.at("key").get<std::string>();
    entries_[key] = record.at("exchange").get<JudgeExchange>();
  }
}

std::optional<JudgeExchange> ResponseCache::get(const std::string& key) const {
  std::lock_guard lock(mutex_);
  auto it = entries_.find(key);
  if (it == entries_.end()) return std::nullopt;
  return it->second;
}

void ResponseCache::put(const std::string& key, const JudgeExchange& exchange) {
  std::lock_guard lock(mutex_);
  auto [it, inserted] = entries_.insert_or_assign(key, exchange);
  (void)it;
  if (!file_ || !inserted) return;
  std::ofstream out(*file_, std::ios::binary | std::ios::app);
  if (!out) throw Error(ErrorCode::IoError, "cannot append to " + file_->string());
  out << jsonl::dump({Json{{"key", key}, {"exchange", exchange}}});
}

std::size_t ResponseCache::size() const {
  std::lock_guard lock(mutex_);
  return entries_.size();
}

}  // namespace nugget::judge
