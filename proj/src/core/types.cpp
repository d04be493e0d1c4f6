#include "nugget/core/types.hpp"

#include <set>

#include "nugget/core/error.hpp"
#include "nugget/core/hash.hpp"
#include "nugget/core/text.hpp"

namespace nugget {

std::string passage_id_for(std::string_view text) {
  return "p_" + short_hash(text::normalize_whitespace_lower(text));
}

Passage Passage::make(std::string text, PassageSource source, std::optional<double> score) {
  Passage p;
  p.id = passage_id_for(text);
  p.text = std::move(text);
  p.source = std::move(source);
  p.score = score;
  return p;
}

Rubric Rubric::make(std::string id, std::string text, WeightClass weight_class,
                    std::vector<std::string> provenance) {
  Rubric r;
  r.id = std::move(id);
  r.text = std::move(text);
  r.weight_class = weight_class;
  r.weight = weight_of(weight_class);
  r.provenance = std::move(provenance);
  return r;
}

double RubricSet::total_weight() const noexcept {
  double total = 0.0;
  for (const auto& r : rubrics) total += r.weight;
  return total;
}

const Rubric* RubricSet::find(std::string_view rubric_id) const noexcept {
  for (const auto& r : rubrics)
    if (r.id == rubric_id) return &r;
  return nullptr;
}

void RubricSet::validate() const {
  std::set<std::string_view> seen;
  for (const auto& r : rubrics) {
    if (!seen.insert(r.id).second)
      throw Error(ErrorCode::SchemaViolation, "duplicate rubric id " + r.id + " in set for question " + question_id);
    if (text::trim(r.text).empty())
      throw Error(ErrorCode::SchemaViolation, "rubric " + r.id + " has empty text");
    if (r.weight != weight_of(r.weight_class))
      throw Error(ErrorCode::SchemaViolation, "rubric " + r.id + " weight does not match its weight class");
  }
}

void GoldRecord::validate() const {
  if (rubric_ids.size() != gold_labels.size())
    throw Error(ErrorCode::SchemaViolation, "gold record for " + question_id + " has " +
                                                std::to_string(rubric_ids.size()) + " rubric ids but " +
                                                std::to_string(gold_labels.size()) + " labels");
  if (rubric_ids.empty() || rubric_ids.size() > kMaxRubricsPerBatch)
    throw Error(ErrorCode::SchemaViolation,
                "gold record for " + question_id + " must list 1..10 rubrics, got " + std::to_string(rubric_ids.size()));
}

}  // namespace nugget
