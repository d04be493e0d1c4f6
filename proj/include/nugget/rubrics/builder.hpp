#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "nugget/core/types.hpp"
#include "nugget/judge/judge.hpp"

namespace nugget::rubrics {

struct IndexedNugget {
  // 1-based, contiguous over the extraction output.
  std::size_t index = 0;
  std::string text;
  std::string source_passage_id;
};

struct MergedNugget {
  std::string text;
  // Source passage ids, first-seen order, no repeats.
  std::vector<std::string> provenance;
};

struct BuildOptions {
  std::size_t max_per_passage = 10;
  std::size_t merge_batch_size = 30;
  // Concurrent extraction requests; the judge applies its own cap too.
  std::size_t workers = 4;
};

// "r_" + a hash of question id and rubric text.
std::string rubric_id_for(std::string_view question_id, std::string_view text);

// Nuggets of every passage, in passage order. A passage whose reply cannot
// be parsed is skipped with a warning; an unreachable judge aborts.
std::vector<IndexedNugget> extract_all(const Question& question, std::span<const Passage> passages,
                                       judge::Judge& judge, std::size_t max_per_passage = 10,
                                       std::size_t workers = 4);

// Merges in batches of at most `batch_size`, then, when there was more than
// one batch, runs a single consolidation pass over all batch outputs.
// Nuggets whose texts are identical after normalisation are folded together
// at the end.
std::vector<MergedNugget> merge_all(const Question& question, std::span<const IndexedNugget> nuggets,
                                    judge::Judge& judge, std::size_t batch_size = 30);

// extract_all -> merge_all -> assign_weights. Either the whole set is built
// or an error is thrown.
RubricSet build_rubric_set(const Question& question, std::span<const Passage> passages, judge::Judge& judge,
                           const BuildOptions& options = {});

// The ground-truth answer of a short-form question as its only, vital rubric.
// Throws EmptyGroundTruth for a blank answer.
RubricSet short_form_rubric(std::string_view question_id, std::string_view ground_truth);

}  // namespace nugget::rubrics
