#include "nugget/judge/http_backend.hpp"

#include "nugget/core/json.hpp"

namespace nugget::judge {

HttpChatBackend::HttpChatBackend(net::HttpEndpoint endpoint, double temperature)
    : endpoint_(std::move(endpoint)), temperature_(temperature) {
  net::parse_url(endpoint_.url);
}

std::string HttpChatBackend::complete(const ChatRequest& request) {
  Json body{{"model", endpoint_.model_name},
            {"messages", Json::array({Json{{"role", "user"}, {"content", request.prompt}}})},
            {"temperature", temperature_}};
  const auto response = net::post_json(endpoint_, body.dump(), ErrorCode::JudgeUnavailable);
  try {
    const auto parsed = Json::parse(response);
    return parsed.at("choices").at(0).at("message").at("content").get<std::string>();
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::JudgeUnavailable, std::string("malformed chat completion: ") + e.what());
  }
}

}  // namespace nugget::judge
