#pragma once

#include <chrono>
#include <string>

#include "nugget/core/error.hpp"

namespace nugget::net {

struct HttpEndpoint {
  // Full URL of the route, e.g. "http://localhost:8000/v1/chat/completions".
  std::string url;
  std::string model_name;
  // Environment variable holding the bearer token; empty for none.
  std::string api_key_env;
  std::chrono::milliseconds timeout{60000};
  int max_retries = 2;
};

struct ParsedUrl {
  std::string origin;  // "https://api.example.com:8443"
  std::string path;    // "/v1/chat/completions?x=1"
};

// Throws ConfigError for anything that is not http(s)://host[:port][/path].
ParsedUrl parse_url(const std::string& url);

// POSTs a JSON body and returns the response body. Transport failures and
// non-2xx statuses are retried `endpoint.max_retries` times, then reported as
// Error(unavailable).
std::string post_json(const HttpEndpoint& endpoint, const std::string& body, ErrorCode unavailable);

// Plain GET with the same retry policy.
std::string get(const std::string& url, std::chrono::milliseconds timeout, int max_retries,
                ErrorCode unavailable);

}  // namespace nugget::net
