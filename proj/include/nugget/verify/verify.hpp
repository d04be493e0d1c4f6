#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "nugget/core/types.hpp"
#include "nugget/judge/judge.hpp"

namespace nugget::verify {

struct SegmentOptions {
  // Headings, lead-in lines ending in ':' and list items shorter than this
  // are glued to the paragraph that follows them.
  std::size_t coalesce_below = 200;
  // Longer blocks are cut at sentence boundaries.
  std::size_t split_above = 4000;
};

// Long-form answers become one block per blank-line separated paragraph,
// short-form answers a single block. An empty answer is one empty block.
std::vector<Block> segment_answer(const Answer& answer, Workload workload, const SegmentOptions& options = {});

struct VerifyOptions {
  std::size_t batch_cap = kMaxRubricsPerBatch;
  std::size_t workers = 4;
  SegmentOptions segment;
};

// Judges every rubric against every block, at most `batch_cap` rubrics per
// judge call. Empty blocks are labelled not_support without a call. Output
// is block-major, rubric order within a block.
std::vector<Judgment> verify_answer(const Question& question, const Answer& answer, const RubricSet& rubrics,
                                    judge::Judge& judge, judge::LabelFormat format, JudgeMode mode,
                                    const VerifyOptions& options = {});

// Same, over blocks that were already segmented.
std::vector<Judgment> verify_blocks(const Question& question, const std::vector<Block>& blocks,
                                    const RubricSet& rubrics, judge::Judge& judge, judge::LabelFormat format,
                                    JudgeMode mode, const VerifyOptions& options = {});

using AggregatedLabel = std::pair<std::string, SupportLabel>;

// Strongest label per rubric across blocks, in rubric-set order. Every rubric
// must be judged on every block index that occurs (or 0..block_count-1 when
// given); otherwise IncompleteCoverage.
std::vector<AggregatedLabel> aggregate(const std::vector<Judgment>& judgments, const RubricSet& rubrics,
                                       std::optional<std::size_t> block_count = std::nullopt);

// Weighted mean of label values. Throws CoverageMismatch unless `aggregated`
// names each rubric exactly once. An empty rubric set scores 0.
RewardScore reward(const RubricSet& rubrics, const std::vector<AggregatedLabel>& aggregated);

// Lowercase, drop punctuation and the articles a/an/the, collapse spaces.
std::string normalize_answer(std::string_view text);
bool em_match(std::string_view prediction, std::string_view ground_truth);

struct HybridVerdict {
  bool correct = false;
  // True when exact match failed and the judge decided.
  bool judged = false;
};

// Exact match first; only a miss is re-checked by the judge in binary mode
// with the ground truth as the single rubric.
HybridVerdict hybrid_verify(const Question& question, std::string_view prediction, std::string_view ground_truth,
                            judge::Judge& judge, judge::LabelFormat format = judge::LabelFormat::json);

}  // namespace nugget::verify
