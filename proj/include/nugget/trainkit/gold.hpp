#pragma once

#include <cstddef>
#include <vector>

#include "nugget/core/types.hpp"
#include "nugget/judge/judge.hpp"

namespace nugget::trainkit {

struct GoldOptions {
  // Independent teacher samples per batch; labels are decided by vote().
  std::size_t votes = 1;
  std::size_t batch_cap = kMaxRubricsPerBatch;
  std::size_t workers = 4;
  JudgeMode mode = JudgeMode::ternary;
};

// Teacher labels for every (block, rubric batch) pair. A batch the teacher
// cannot label within the retry budget aborts the run (VerificationFailed);
// labels are never imputed. Empty blocks are skipped.
std::vector<GoldRecord> generate_gold(const Question& question, const std::vector<Block>& blocks,
                                      const RubricSet& rubrics, judge::Judge& teacher, judge::LabelFormat format,
                                      const GoldOptions& options = {});

}  // namespace nugget::trainkit
