#pragma once

#include <string>

#include "nugget/core/json.hpp"
#include "nugget/judge/templates.hpp"

namespace nugget::judge {

// One prompted call with its parsed reasoning and payload.
struct JudgeExchange {
  TemplateId template_id = TemplateId::rewrite;
  std::string rendered_prompt;
  std::string raw_response;
  std::string reasoning;
  std::string payload;
  int attempt = 0;
};

void to_json(Json& j, const JudgeExchange& e);
void from_json(const Json& j, JudgeExchange& e);

}  // namespace nugget::judge
