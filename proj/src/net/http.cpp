#include "nugget/net/http.hpp"

#include <httplib.h>

#include <cstdlib>
#include <regex>
#include <thread>

#include <spdlog/spdlog.h>

namespace nugget::net {

namespace {

httplib::Client make_client(const ParsedUrl& url, std::chrono::milliseconds timeout) {
  httplib::Client client(url.origin);
  const auto secs = std::chrono::duration_cast<std::chrono::seconds>(timeout);
  const auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(timeout - secs);
  client.set_connection_timeout(secs.count(), usecs.count());
  client.set_read_timeout(secs.count(), usecs.count());
  client.set_write_timeout(secs.count(), usecs.count());
  client.set_follow_location(true);
  return client;
}

template <typename Send>
std::string with_retries(const std::string& url, int max_retries, ErrorCode unavailable, Send send) {
  std::string last_error;
  for (int attempt = 0; attempt <= max_retries; ++attempt) {
    if (attempt > 0) std::this_thread::sleep_for(std::chrono::milliseconds(100 << std::min(attempt, 5)));
    httplib::Result result = send();
    if (!result) {
      last_error = httplib::to_string(result.error());
    } else if (result->status < 200 || result->status >= 300) {
      last_error = "HTTP " + std::to_string(result->status);
    } else {
      return result->body;
    }
    spdlog::debug("request to {} failed (attempt {}): {}", url, attempt + 1, last_error);
  }
  throw Error(unavailable, url + ": " + last_error);
}

}  // namespace

ParsedUrl parse_url(const std::string& url) {
  static const std::regex pattern(R"(^(https?://[^/?#\s]+)([/?][^\s]*)?$)", std::regex::icase);
  std::smatch m;
  if (!std::regex_match(url, m, pattern)) throw Error(ErrorCode::ConfigError, "invalid URL '" + url + "'");
  ParsedUrl out{m[1].str(), m[2].matched ? m[2].str() : "/"};
  if (out.path.front() == '?') out.path.insert(out.path.begin(), '/');
  return out;
}

std::string post_json(const HttpEndpoint& endpoint, const std::string& body, ErrorCode unavailable) {
  const auto url = parse_url(endpoint.url);
  auto client = make_client(url, endpoint.timeout);
  httplib::Headers headers;
  if (!endpoint.api_key_env.empty()) {
    if (const char* key = std::getenv(endpoint.api_key_env.c_str()); key && *key)
      headers.emplace("Authorization", std::string("Bearer ") + key);
  }
  return with_retries(endpoint.url, endpoint.max_retries, unavailable,
                      [&] { return client.Post(url.path, headers, body, "application/json"); });
}

std::string get(const std::string& target, std::chrono::milliseconds timeout, int max_retries,
                ErrorCode unavailable) {
  const auto url = parse_url(target);
  auto client = make_client(url, timeout);
  return with_retries(target, max_retries, unavailable, [&] { return client.Get(url.path); });
}

}  // namespace nugget::net
