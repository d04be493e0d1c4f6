#pragma once

#include <chrono>
#include <cstddef>
#include <mutex>
#include <string>
#include <string_view>
#include <vector>

#include "nugget/core/types.hpp"
#include "nugget/net/http.hpp"

namespace nugget::retrieval {

struct SearchResult {
  std::string url;
  std::string title;
  std::string snippet;
};

class SearchProvider {
 public:
  virtual ~SearchProvider() = default;
  // Throws ProviderUnavailable.
  virtual std::vector<SearchResult> search(const std::string& query, std::size_t max_results) = 0;
};

class PageReader {
 public:
  virtual ~PageReader() = default;
  // Plain readable text of the page; throws on failure.
  virtual std::string read(const std::string& url) = 0;
};

// GET <url>?q=<query>&n=<max> returning [{url, title, snippet}] or
// {results: [...]}.
class HttpSearchProvider : public SearchProvider {
 public:
  explicit HttpSearchProvider(net::HttpEndpoint endpoint);
  std::vector<SearchResult> search(const std::string& query, std::size_t max_results) override;

 private:
  net::HttpEndpoint endpoint_;
};

// Downloads the page and strips markup with html_to_text. Requests to the
// same host are spaced by `politeness`.
class HttpPageReader : public PageReader {
 public:
  explicit HttpPageReader(std::chrono::milliseconds timeout = std::chrono::seconds(20),
                          std::chrono::milliseconds politeness = std::chrono::milliseconds(500));
  std::string read(const std::string& url) override;

 private:
  std::chrono::milliseconds timeout_;
  std::chrono::milliseconds politeness_;
  std::mutex mutex_;
  std::vector<std::pair<std::string, std::chrono::steady_clock::time_point>> last_hit_;
};

// Drops script/style/head content and tags, decodes common entities, and
// treats block-level tags as paragraph breaks.
std::string html_to_text(std::string_view html);

std::string url_encode(std::string_view s);

// Fetches up to `max_pages` result pages and segments each into passages
// tagged with the page URL. Pages that fail to load are skipped.
std::vector<Passage> web_fetch(SearchProvider& provider, PageReader& reader, const std::string& query,
                               std::size_t max_pages, std::size_t min_sentences = 5, std::size_t max_sentences = 10);

}  // namespace nugget::retrieval
