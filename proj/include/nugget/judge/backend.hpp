#pragma once

#include <map>
#include <string>
#include <vector>

#include "nugget/judge/templates.hpp"

namespace nugget::judge {

// One prompt sent to a chat model. Remote backends only look at `prompt`;
// the scripted mock uses the structured fields to pick its reply.
struct ChatRequest {
  TemplateId template_id = TemplateId::rewrite;
  std::string prompt;
  TemplateVars vars;
  // Un-rendered list items (nuggets, queries) the prompt enumerates.
  std::vector<std::string> items;
  // Extra context for scripted backends, e.g. {"format": "csv"}.
  std::map<std::string, std::string> meta;
  int attempt = 0;
  int sample = 0;
};

class ChatBackend {
 public:
  virtual ~ChatBackend() = default;

  // Returns the raw assistant message. Throws Error(JudgeUnavailable) when
  // the model cannot be reached.
  virtual std::string complete(const ChatRequest& request) = 0;

  virtual std::string model_name() const = 0;
};

}  // namespace nugget::judge
