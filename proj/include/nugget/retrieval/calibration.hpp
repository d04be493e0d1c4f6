#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "nugget/core/json.hpp"
#include "nugget/retrieval/index.hpp"

namespace nugget::retrieval {

struct QrelRecord {
  std::string query_text;
  std::string passage_id;
  bool relevant = false;
};

struct ScoreSummary {
  std::size_t count = 0;
  double min = 0.0;
  double max = 0.0;
  double mean = 0.0;
};

struct ThresholdCalibration {
  double threshold = 0.0;
  double balanced_accuracy = 0.0;
  ScoreSummary relevant;
  ScoreSummary irrelevant;
};

void to_json(Json& j, const ScoreSummary& s);
void from_json(const Json& j, ScoreSummary& s);
void to_json(Json& j, const QrelRecord& q);
void from_json(const Json& j, QrelRecord& q);
void to_json(Json& j, const ThresholdCalibration& c);
void from_json(const Json& j, ThresholdCalibration& c);

// Picks the threshold t (score >= t means relevant) that maximises balanced
// accuracy. Candidates are the lowest observed score and every midpoint
// between adjacent distinct scores; ties go to the lower threshold. Throws
// InsufficientLabels when either class is empty.
ThresholdCalibration calibrate_from_scores(std::span<const double> relevant, std::span<const double> irrelevant);

// Scores every qrel pair with the index; pairs whose passage is not indexed
// are skipped with a warning.
ThresholdCalibration calibrate_threshold(std::span<const QrelRecord> qrels, const VectorIndex& index);

// Hits among the top k_max scoring at least the threshold; if none passes,
// the single best hit. Empty index -> empty list.
std::vector<RetrievalHit> retrieve_relevant(const VectorIndex& index, const std::string& query,
                                            const ThresholdCalibration& calibration, std::size_t k_max = 20);

}  // namespace nugget::retrieval
