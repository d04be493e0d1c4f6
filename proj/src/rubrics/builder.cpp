#include "nugget/rubrics/builder.hpp"

#include <algorithm>
#include <unordered_map>

#include <spdlog/spdlog.h>

#include "nugget/core/error.hpp"
#include "nugget/core/hash.hpp"
#include "nugget/core/parallel.hpp"
#include "nugget/core/text.hpp"

namespace nugget::rubrics {

namespace {

void add_provenance(std::vector<std::string>& into, const std::vector<std::string>& from) {
  for (const auto& id : from)
    if (std::find(into.begin(), into.end(), id) == into.end()) into.push_back(id);
}

std::vector<MergedNugget> merge_pass(const Question& question, std::vector<MergedNugget> items, judge::Judge& judge) {
  if (items.size() < 2) return items;
  std::vector<std::string> texts;
  texts.reserve(items.size());
  for (const auto& item : items) texts.push_back(item.text);
  const auto groups = judge.merge_nuggets(question, texts);
  std::vector<MergedNugget> out;
  out.reserve(groups.size());
  for (const auto& group : groups) {
    MergedNugget merged{group.text, {}};
    for (std::size_t index : group.source_indices) add_provenance(merged.provenance, items[index - 1].provenance);
    out.push_back(std::move(merged));
  }
  return out;
}

}  // namespace

std::string rubric_id_for(std::string_view question_id, std::string_view text) {
  std::string material(question_id);
  material += '\n';
  material += text;
  return "r_" + short_hash(material);
}

std::vector<IndexedNugget> extract_all(const Question& question, std::span<const Passage> passages,
                                       judge::Judge& judge, std::size_t max_per_passage, std::size_t workers) {
  std::vector<std::vector<std::string>> per_passage(passages.size());
  parallel_for(passages.size(), workers, [&](std::size_t i) {
    try {
      per_passage[i] = judge.extract_nuggets(question, passages[i], max_per_passage);
    } catch (const Error& e) {
      if (e.code() == ErrorCode::JudgeUnavailable) throw;
      spdlog::warn("no nuggets from passage {}: {}", passages[i].id, e.what());
    }
  });
  std::vector<IndexedNugget> out;
  for (std::size_t i = 0; i < passages.size(); ++i)
    for (auto& text : per_passage[i]) out.push_back({out.size() + 1, std::move(text), passages[i].id});
  return out;
}

std::vector<MergedNugget> merge_all(const Question& question, std::span<const IndexedNugget> nuggets,
                                    judge::Judge& judge, std::size_t batch_size) {
  if (batch_size < 2) throw Error(ErrorCode::ConfigError, "merge batch size must be at least 2");
  std::vector<MergedNugget> first_pass;
  std::size_t batches = 0;
  for (std::size_t begin = 0; begin < nuggets.size(); begin += batch_size, ++batches) {
    std::vector<MergedNugget> batch;
    for (std::size_t i = begin; i < std::min(nuggets.size(), begin + batch_size); ++i)
      batch.push_back({nuggets[i].text, {nuggets[i].source_passage_id}});
    for (auto& merged : merge_pass(question, std::move(batch), judge)) first_pass.push_back(std::move(merged));
  }
  auto merged = batches > 1 ? merge_pass(question, std::move(first_pass), judge) : std::move(first_pass);

  std::vector<MergedNugget> out;
  std::unordered_map<std::string, std::size_t> by_text;
  for (auto& item : merged) {
    auto key = text::normalize_whitespace_lower(item.text);
    if (key.empty()) continue;
    if (auto it = by_text.find(key); it != by_text.end()) {
      add_provenance(out[it->second].provenance, item.provenance);
      continue;
    }
    by_text.emplace(std::move(key), out.size());
    item.text = std::string(text::trim(item.text));
    out.push_back(std::move(item));
  }
  return out;
}

RubricSet build_rubric_set(const Question& question, std::span<const Passage> passages, judge::Judge& judge,
                           const BuildOptions& options) {
  RubricSet set{question.id, {}};
  const auto nuggets = extract_all(question, passages, judge, options.max_per_passage, options.workers);
  if (nuggets.empty()) {
    spdlog::warn("question {} produced no nuggets; its rubric set is empty", question.id);
    return set;
  }
  const auto merged = merge_all(question, nuggets, judge, options.merge_batch_size);
  std::vector<std::string> texts;
  for (const auto& m : merged) texts.push_back(m.text);
  const auto weights = judge.assign_weights(question, texts);
  for (std::size_t i = 0; i < merged.size(); ++i)
    set.rubrics.push_back(
        Rubric::make(rubric_id_for(question.id, merged[i].text), merged[i].text, weights[i], merged[i].provenance));
  set.validate();
  return set;
}

RubricSet short_form_rubric(std::string_view question_id, std::string_view ground_truth) {
  const auto text = std::string(text::trim(ground_truth));
  if (text.empty()) throw Error(ErrorCode::EmptyGroundTruth, "question " + std::string(question_id) + " has no ground truth");
  RubricSet set{std::string(question_id), {}};
  set.rubrics.push_back(Rubric::make(rubric_id_for(question_id, text), text, WeightClass::vital, {}));
  return set;
}

}  // namespace nugget::rubrics
