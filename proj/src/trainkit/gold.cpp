#include "nugget/trainkit/gold.hpp"

#include "nugget/core/error.hpp"
#include "nugget/core/parallel.hpp"
#include "nugget/core/text.hpp"
#include "nugget/trainkit/reward.hpp"

namespace nugget::trainkit {

std::vector<GoldRecord> generate_gold(const Question& question, const std::vector<Block>& blocks,
                                      const RubricSet& rubrics, judge::Judge& teacher, judge::LabelFormat format,
                                      const GoldOptions& options) {
  if (options.votes == 0) throw Error(ErrorCode::ConfigError, "gold generation needs at least one vote");
  if (options.batch_cap == 0 || options.batch_cap > kMaxRubricsPerBatch)
    throw Error(ErrorCode::ConfigError, "batch cap must be in 1.." + std::to_string(kMaxRubricsPerBatch));

  struct Task {
    std::size_t block;
    std::size_t first;
    std::size_t count;
  };
  std::vector<Task> tasks;
  for (std::size_t b = 0; b < blocks.size(); ++b) {
    if (text::trim(blocks[b].text).empty()) continue;
    for (std::size_t first = 0; first < rubrics.rubrics.size(); first += options.batch_cap)
      tasks.push_back({b, first, std::min(options.batch_cap, rubrics.rubrics.size() - first)});
  }

  std::vector<GoldRecord> out(tasks.size());
  parallel_for(tasks.size(), options.workers, [&](std::size_t t) {
    const auto& task = tasks[t];
    std::span<const Rubric> batch(rubrics.rubrics.data() + task.first, task.count);
    std::vector<std::vector<SupportLabel>> samples;
    std::string reasoning;
    for (std::size_t v = 0; v < options.votes; ++v) {
      auto result = teacher.verify_rubrics_detailed(question, blocks[task.block], batch, format, options.mode,
                                                    static_cast<int>(v));
      if (v == 0) reasoning = std::move(result.reasoning);
      samples.push_back(std::move(result.labels));
    }
    GoldRecord& record = out[t];
    record.question_id = question.id;
    record.block = blocks[task.block];
    record.reasoning = std::string(text::trim(reasoning));
    for (std::size_t i = 0; i < task.count; ++i) {
      record.rubric_ids.push_back(batch[i].id);
      std::vector<SupportLabel> column;
      for (const auto& s : samples) column.push_back(s[i]);
      record.gold_labels.push_back(vote(column));
    }
    record.validate();
  });
  return out;
}

}  // namespace nugget::trainkit
