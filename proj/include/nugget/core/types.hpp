#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "nugget/core/labels.hpp"

namespace nugget {

struct Question {
  std::string id;
  std::string text;
  Workload workload = Workload::long_form;
};

struct CorpusSource {
  std::string doc_id;
  std::size_t segment_index = 0;

  bool operator==(const CorpusSource&) const = default;
};

struct WebSource {
  std::string url;

  bool operator==(const WebSource&) const = default;
};

using PassageSource = std::variant<CorpusSource, WebSource>;

// Passage ids are a content hash of the lowercased, whitespace-normalized
// text, so the same passage reached through different retrieval paths is
// recognised as already seen.
std::string passage_id_for(std::string_view text);

struct Passage {
  std::string id;
  std::string text;
  PassageSource source;
  std::optional<double> score;

  static Passage make(std::string text, PassageSource source,
                      std::optional<double> score = std::nullopt);
};

struct Rubric {
  std::string id;
  std::string text;
  WeightClass weight_class = WeightClass::vital;
  double weight = 1.0;
  std::vector<std::string> provenance;

  static Rubric make(std::string id, std::string text, WeightClass weight_class,
                     std::vector<std::string> provenance = {});
};

struct RubricSet {
  std::string question_id;
  std::vector<Rubric> rubrics;

  double total_weight() const noexcept;
  const Rubric* find(std::string_view rubric_id) const noexcept;
  // Throws SchemaViolation on duplicate ids, empty texts, or a weight that
  // does not match its weight class.
  void validate() const;
};

struct Block {
  std::size_t index = 0;
  std::string text;

  bool operator==(const Block&) const = default;
};

struct Judgment {
  std::string rubric_id;
  std::size_t block_index = 0;
  SupportLabel label = SupportLabel::not_support;

  bool operator==(const Judgment&) const = default;
};

struct Answer {
  std::string question_id;
  std::string text;
  std::string generator;
};

struct RubricContribution {
  std::string rubric_id;
  SupportLabel label = SupportLabel::not_support;
  double contribution = 0.0;
};

struct RewardScore {
  double value = 0.0;
  std::vector<RubricContribution> per_rubric;
};

inline constexpr std::size_t kMaxRubricsPerBatch = 10;

struct GoldRecord {
  std::string question_id;
  Block block;
  std::vector<std::string> rubric_ids;
  std::vector<SupportLabel> gold_labels;
  std::string reasoning;

  void validate() const;
};

}  // namespace nugget
