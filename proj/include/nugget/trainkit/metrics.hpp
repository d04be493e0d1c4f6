#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "nugget/core/json.hpp"
#include "nugget/core/labels.hpp"

namespace nugget::trainkit {

enum class MetricLevel { rubric, sample };

struct ClassMetrics {
  SupportLabel label = SupportLabel::not_support;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  // Gold occurrences of the class.
  std::size_t support = 0;
};

struct MetricReport {
  MetricLevel level = MetricLevel::rubric;
  std::vector<ClassMetrics> per_class;
  double macro_precision = 0.0;
  double macro_recall = 0.0;
  double macro_f1 = 0.0;
  std::size_t count = 0;
};

void to_json(Json& j, const MetricReport& r);

// One-vs-rest precision, recall and F1 per declared class; undefined ratios
// count as 0 and macro values average over every declared class. Throws
// LengthMismatch unless |pred| = |gold| >= 1.
MetricReport macro_f1(std::span<const SupportLabel> pred, std::span<const SupportLabel> gold,
                      std::span<const SupportLabel> classes = kAllLabels, MetricLevel level = MetricLevel::rubric);

// Product-moment correlation, accumulated in one pass with Welford-style
// co-moment updates. Throws LengthMismatch for unequal lengths and
// DegenerateInput for fewer than two points or a constant series.
double pearson(std::span<const double> x, std::span<const double> y);

// One predicted and one gold label for a (block, rubric) pair of an answer.
struct LabeledJudgment {
  std::string question_id;
  std::string answer_id;
  std::string rubric_id;
  std::size_t block_index = 0;
  SupportLabel predicted = SupportLabel::not_support;
  SupportLabel gold = SupportLabel::not_support;
};

void to_json(Json& j, const LabeledJudgment& l);
void from_json(const Json& j, LabeledJudgment& l);

struct LevelReports {
  MetricReport rubric_level;
  MetricReport sample_level;
};

// Rubric level scores every (block, rubric) pair. Sample level first
// max-pools predicted and gold labels per (question, answer, rubric). Every
// rubric of an answer must be labelled on the same blocks, otherwise
// IncompleteCoverage.
LevelReports sample_level_metrics(std::span<const LabeledJudgment> judgments,
                                  std::span<const SupportLabel> classes = kAllLabels);

}  // namespace nugget::trainkit
