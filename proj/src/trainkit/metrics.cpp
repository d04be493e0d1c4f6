#include "nugget/trainkit/metrics.hpp"

#include <cmath>
#include <map>
#include <set>
#include <tuple>

#include "nugget/core/error.hpp"

namespace nugget::trainkit {

void to_json(Json& j, const MetricReport& r) {
  Json classes = Json::array();
  for (const auto& c : r.per_class)
    classes.push_back(Json{{"label", c.label},
                           {"precision", c.precision},
                           {"recall", c.recall},
                           {"f1", c.f1},
                           {"support", c.support}});
  j = Json{{"level", r.level == MetricLevel::rubric ? "rubric" : "sample"},
           {"count", r.count},
           {"per_class", classes},
           {"macro_precision", r.macro_precision},
           {"macro_recall", r.macro_recall},
           {"macro_f1", r.macro_f1}};
}

MetricReport macro_f1(std::span<const SupportLabel> pred, std::span<const SupportLabel> gold,
                      std::span<const SupportLabel> classes, MetricLevel level) {
  if (pred.size() != gold.size() || pred.empty())
    throw Error(ErrorCode::LengthMismatch, "macro F1 needs equally long, non-empty label lists (got " +
                                               std::to_string(pred.size()) + " and " + std::to_string(gold.size()) + ")");
  MetricReport report;
  report.level = level;
  report.count = pred.size();
  for (auto label : classes) {
    std::size_t tp = 0, fp = 0, fn = 0;
    for (std::size_t i = 0; i < pred.size(); ++i) {
      const bool p = pred[i] == label, g = gold[i] == label;
      tp += p && g;
      fp += p && !g;
      fn += !p && g;
    }
    ClassMetrics m;
    m.label = label;
    m.support = tp + fn;
    m.precision = tp + fp ? static_cast<double>(tp) / static_cast<double>(tp + fp) : 0.0;
    m.recall = tp + fn ? static_cast<double>(tp) / static_cast<double>(tp + fn) : 0.0;
    m.f1 = m.precision + m.recall > 0.0 ? 2.0 * m.precision * m.recall / (m.precision + m.recall) : 0.0;
    report.per_class.push_back(m);
  }
  if (!classes.empty()) {
    for (const auto& m : report.per_class) {
      report.macro_precision += m.precision;
      report.macro_recall += m.recall;
      report.macro_f1 += m.f1;
    }
    const auto n = static_cast<double>(classes.size());
    report.macro_precision /= n;
    report.macro_recall /= n;
    report.macro_f1 /= n;
  }
  return report;
}

double pearson(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size())
    throw Error(ErrorCode::LengthMismatch, "pearson needs series of equal length");
  if (x.size() < 2) throw Error(ErrorCode::DegenerateInput, "pearson needs at least two points");
  double mean_x = 0.0, mean_y = 0.0, m2_x = 0.0, m2_y = 0.0, co = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double n = static_cast<double>(i + 1);
    const double dx = x[i] - mean_x;
    mean_x += dx / n;
    const double dy = y[i] - mean_y;
    mean_y += dy / n;
    m2_x += dx * (x[i] - mean_x);
    m2_y += dy * (y[i] - mean_y);
    co += dx * (y[i] - mean_y);
  }
  if (m2_x <= 0.0 || m2_y <= 0.0) throw Error(ErrorCode::DegenerateInput, "pearson is undefined for a constant series");
  return co / std::sqrt(m2_x * m2_y);
}

void to_json(Json& j, const LabeledJudgment& l) {
  j = Json{{"question_id", l.question_id}, {"answer_id", l.answer_id}, {"rubric_id", l.rubric_id},
           {"block_index", l.block_index}, {"predicted", l.predicted},   {"gold", l.gold}};
}

void from_json(const Json& j, LabeledJudgment& l) {
  try {
    j.at("question_id").get_to(l.question_id);
    j.at("answer_id").get_to(l.answer_id);
    j.at("rubric_id").get_to(l.rubric_id);
    j.at("block_index").get_to(l.block_index);
    l.predicted = j.at("predicted").get<SupportLabel>();
    l.gold = j.at("gold").get<SupportLabel>();
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::SchemaViolation, std::string("labeled judgment: ") + e.what());
  }
}

LevelReports sample_level_metrics(std::span<const LabeledJudgment> judgments, std::span<const SupportLabel> classes) {
  std::vector<SupportLabel> pred, gold;
  for (const auto& j : judgments) {
    pred.push_back(j.predicted);
    gold.push_back(j.gold);
  }
  LevelReports out;
  out.rubric_level = macro_f1(pred, gold, classes, MetricLevel::rubric);

  using AnswerKey = std::pair<std::string, std::string>;
  struct Pooled {
    std::set<std::size_t> blocks;
    SupportLabel pred = SupportLabel::not_support;
    SupportLabel gold = SupportLabel::not_support;
  };
  // Ordered maps keep the sample-level sequence deterministic.
  std::map<AnswerKey, std::map<std::string, Pooled>> by_answer;
  for (const auto& j : judgments) {
    auto& pooled = by_answer[{j.question_id, j.answer_id}][j.rubric_id];
    pooled.blocks.insert(j.block_index);
    pooled.pred = label_max(pooled.pred, j.predicted);
    pooled.gold = label_max(pooled.gold, j.gold);
  }
  pred.clear();
  gold.clear();
  for (const auto& [answer, rubrics] : by_answer) {
    std::set<std::size_t> all_blocks;
    for (const auto& [id, pooled] : rubrics) all_blocks.insert(pooled.blocks.begin(), pooled.blocks.end());
    for (const auto& [id, pooled] : rubrics) {
      if (pooled.blocks != all_blocks)
        throw Error(ErrorCode::IncompleteCoverage, "rubric " + id + " of answer " + answer.second + " (question " +
                                                       answer.first + ") is not labelled on every block");
      pred.push_back(pooled.pred);
      gold.push_back(pooled.gold);
    }
  }
  out.sample_level = macro_f1(pred, gold, classes, MetricLevel::sample);
  return out;
}

}  // namespace nugget::trainkit
