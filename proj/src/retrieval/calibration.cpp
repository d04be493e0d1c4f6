#include "nugget/retrieval/calibration.hpp"

#include <algorithm>

#include <spdlog/spdlog.h>

#include "nugget/core/error.hpp"

namespace nugget::retrieval {

namespace {

ScoreSummary summarize(std::span<const double> scores) {
  ScoreSummary s;
  s.count = scores.size();
  if (scores.empty()) return s;
  s.min = *std::min_element(scores.begin(), scores.end());
  s.max = *std::max_element(scores.begin(), scores.end());
  double sum = 0.0;
  for (double x : scores) sum += x;
  s.mean = sum / static_cast<double>(scores.size());
  return s;
}

}  // namespace

void to_json(Json& j, const ScoreSummary& s) {
  j = Json{{"count", s.count}, {"min", s.min}, {"max", s.max}, {"mean", s.mean}};
}

void from_json(const Json& j, ScoreSummary& s) {
  j.at("count").get_to(s.count);
  j.at("min").get_to(s.min);
  j.at("max").get_to(s.max);
  j.at("mean").get_to(s.mean);
}

void to_json(Json& j, const QrelRecord& q) {
  j = Json{{"query_text", q.query_text}, {"passage_id", q.passage_id}, {"relevant", q.relevant}};
}

void from_json(const Json& j, QrelRecord& q) {
  try {
    j.at("query_text").get_to(q.query_text);
    j.at("passage_id").get_to(q.passage_id);
    j.at("relevant").get_to(q.relevant);
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::SchemaViolation, std::string("qrel: ") + e.what());
  }
}

void to_json(Json& j, const ThresholdCalibration& c) {
  j = Json{{"threshold", c.threshold},
           {"balanced_accuracy", c.balanced_accuracy},
           {"relevant", c.relevant},
           {"irrelevant", c.irrelevant}};
}

void from_json(const Json& j, ThresholdCalibration& c) {
  try {
    j.at("threshold").get_to(c.threshold);
    c.balanced_accuracy = j.value("balanced_accuracy", 0.0);
    if (j.contains("relevant")) j.at("relevant").get_to(c.relevant);
    if (j.contains("irrelevant")) j.at("irrelevant").get_to(c.irrelevant);
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::SchemaViolation, std::string("calibration: ") + e.what());
  }
}

ThresholdCalibration calibrate_from_scores(std::span<const double> relevant, std::span<const double> irrelevant) {
  if (relevant.empty() || irrelevant.empty())
    throw Error(ErrorCode::InsufficientLabels, "calibration needs both relevant and irrelevant examples");

  std::vector<std::pair<double, bool>> scored;
  scored.reserve(relevant.size() + irrelevant.size());
  for (double s : relevant) scored.emplace_back(s, true);
  for (double s : irrelevant) scored.emplace_back(s, false);
  std::sort(scored.begin(), scored.end());

  const auto R = static_cast<long long>(relevant.size());
  const auto I = static_cast<long long>(irrelevant.size());
  // Balanced accuracy scaled by 2*R*I, so candidates compare exactly.
  auto objective = [&](long long tp, long long tn) { return tp * I + tn * R; };

  double best_threshold = scored.front().first;
  long long best = objective(R, 0);
  long long best_tp = R, best_tn = 0;

  long long rel_below = 0, irr_below = 0;
  for (std::size_t i = 0; i < scored.size();) {
    std::size_t j = i;
    while (j < scored.size() && scored[j].first == scored[i].first) {
      (scored[j].second ? rel_below : irr_below) += 1;
      ++j;
    }
    if (j == scored.size()) break;
    const double candidate = (scored[i].first + scored[j].first) / 2.0;
    const long long tp = R - rel_below, tn = irr_below;
    if (objective(tp, tn) > best) {
      best = objective(tp, tn);
      best_threshold = candidate;
      best_tp = tp;
      best_tn = tn;
    }
    i = j;
  }

  ThresholdCalibration out;
  out.threshold = best_threshold;
  out.balanced_accuracy = 0.5 * (static_cast<double>(best_tp) / static_cast<double>(R) +
                                 static_cast<double>(best_tn) / static_cast<double>(I));
  out.relevant = summarize(relevant);
  out.irrelevant = summarize(irrelevant);
  return out;
}

ThresholdCalibration calibrate_threshold(std::span<const QrelRecord> qrels, const VectorIndex& index) {
  std::vector<std::pair<std::string, std::string>> pairs;
  pairs.reserve(qrels.size());
  for (const auto& q : qrels) pairs.emplace_back(q.query_text, q.passage_id);
  const auto scores = index.scores(pairs);
  std::vector<double> relevant, irrelevant;
  for (std::size_t i = 0; i < qrels.size(); ++i) {
    if (!scores[i]) {
      spdlog::warn("qrel passage {} is not in the index; skipped", qrels[i].passage_id);
      continue;
    }
    (qrels[i].relevant ? relevant : irrelevant).push_back(*scores[i]);
  }
  return calibrate_from_scores(relevant, irrelevant);
}

std::vector<RetrievalHit> retrieve_relevant(const VectorIndex& index, const std::string& query,
                                            const ThresholdCalibration& calibration, std::size_t k_max) {
  auto hits = index.search(query, k_max);
  if (hits.empty()) return hits;
  std::vector<RetrievalHit> kept;
  for (auto& hit : hits)
    if (hit.score >= calibration.threshold) kept.push_back(hit);
  if (kept.empty()) kept.push_back(std::move(hits.front()));
  return kept;
}

}  // namespace nugget::retrieval
