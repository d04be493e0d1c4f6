#include "nugget/judge/exchange.hpp"

#include "nugget/core/error.hpp"

namespace nugget::judge {

void to_json(Json& j, const JudgeExchange& e) {
  j = Json{{"template_id", to_string(e.template_id)},
           {"rendered_prompt", e.rendered_prompt},
           {"raw_response", e.raw_response},
           {"reasoning", e.reasoning},
           {"payload", e.payload},
           {"attempt", e.attempt}};
}

void from_json(const Json& j, JudgeExchange& e) {
  try {
    const auto name = j.at("template_id").get<std::string>();
    const auto id = template_from_string(name);
    if (!id) throw Error(ErrorCode::SchemaViolation, "unknown template_id '" + name + "'");
    e.template_id = *id;
    j.at("rendered_prompt").get_to(e.rendered_prompt);
    j.at("raw_response").get_to(e.raw_response);
    j.at("reasoning").get_to(e.reasoning);
    j.at("payload").get_to(e.payload);
    j.at("attempt").get_to(e.attempt);
  } catch (const Json::exception& ex) {
    throw Error(ErrorCode::SchemaViolation, std::string("judge exchange: ") + ex.what());
  }
}

}  // namespace nugget::judge
