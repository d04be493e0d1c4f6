#pragma once

#include "nugget/judge/backend.hpp"
#include "nugget/net/http.hpp"

namespace nugget::judge {

// Chat-completion client for the common open inference wire shape:
//   {model, messages:[{role:"user", content}], temperature}
//   -> choices[0].message.content
class HttpChatBackend : public ChatBackend {
 public:
  HttpChatBackend(net::HttpEndpoint endpoint, double temperature);

  std::string complete(const ChatRequest& request) override;
  std::string model_name() const override { return endpoint_.model_name; }

 private:
  net::HttpEndpoint endpoint_;
  double temperature_;
};

}  // namespace nugget::judge
