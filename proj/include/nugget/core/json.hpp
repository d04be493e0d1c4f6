#pragma once

// JSON mapping for the core value types. Field names follow the persisted
// schemas; enums are written as snake_case strings.

#include <json.hpp>

#include "nugget/core/types.hpp"

namespace nugget {

using Json = nlohmann::json;

void to_json(Json& j, SupportLabel label);
void from_json(const Json& j, SupportLabel& label);
void to_json(Json& j, WeightClass weight_class);
void from_json(const Json& j, WeightClass& weight_class);
void to_json(Json& j, Workload workload);
void from_json(const Json& j, Workload& workload);

void to_json(Json& j, const Question& q);
void from_json(const Json& j, Question& q);
void to_json(Json& j, const PassageSource& source);
void from_json(const Json& j, PassageSource& source);
void to_json(Json& j, const Passage& p);
void from_json(const Json& j, Passage& p);
void to_json(Json& j, const Rubric& r);
void from_json(const Json& j, Rubric& r);
void to_json(Json& j, const RubricSet& s);
void from_json(const Json& j, RubricSet& s);
void to_json(Json& j, const Block& b);
void from_json(const Json& j, Block& b);
void to_json(Json& j, const Judgment& jd);
void from_json(const Json& j, Judgment& jd);
void to_json(Json& j, const Answer& a);
void from_json(const Json& j, Answer& a);
void to_json(Json& j, const RubricContribution& c);
void from_json(const Json& j, RubricContribution& c);
void to_json(Json& j, const RewardScore& r);
void from_json(const Json& j, RewardScore& r);
void to_json(Json& j, const GoldRecord& g);
void from_json(const Json& j, GoldRecord& g);

}  // namespace nugget
