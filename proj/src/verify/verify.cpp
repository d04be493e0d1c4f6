#include "nugget/verify/verify.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <map>
#include <set>
#include <unordered_map>

#include <spdlog/spdlog.h>

#include "nugget/core/error.hpp"
#include "nugget/core/parallel.hpp"
#include "nugget/core/text.hpp"
#include "nugget/retrieval/segment.hpp"
#include "nugget/rubrics/builder.hpp"

namespace nugget::verify {

namespace {

std::vector<std::string> paragraphs_of(std::string_view text) {
  std::vector<std::string> out;
  std::string current;
  for (auto line : text::split_lines(text)) {
    if (text::trim(line).empty()) {
      if (!current.empty()) out.push_back(std::move(current));
      current.clear();
      continue;
    }
    if (!current.empty()) current += '\n';
    while (!line.empty() && std::isspace(static_cast<unsigned char>(line.back()))) line.remove_suffix(1);
    current += line;
  }
  if (!current.empty()) out.push_back(std::move(current));
  for (auto& p : out) p = std::string(text::trim(p));
  return out;
}

bool is_list_item(std::string_view p) {
  if (p.size() >= 2 && (p[0] == '-' || p[0] == '*' || p[0] == '+') && p[1] == ' ') return true;
  std::size_t digits = 0;
  while (digits < p.size() && std::isdigit(static_cast<unsigned char>(p[digits]))) ++digits;
  return digits > 0 && digits + 1 < p.size() && (p[digits] == '.' || p[digits] == ')') && p[digits + 1] == ' ';
}

bool is_fragment(std::string_view p, std::size_t limit) {
  if (p.size() >= limit) return false;
  return p.back() == ':' || p.front() == '#' || is_list_item(p);
}

// Greedy sentence packing; a sentence longer than `limit` is cut at the
// last space that fits.
std::vector<std::string> split_long(const std::string& block, std::size_t limit) {
  if (block.size() <= limit) return {block};
  std::vector<std::string> pieces;
  for (auto& sentence : retrieval::split_sentences(block)) {
    std::string_view rest = sentence;
    while (rest.size() > limit) {
      auto cut = rest.substr(0, limit).rfind(' ');
      if (cut == std::string_view::npos || cut == 0) cut = limit;
      pieces.emplace_back(text::trim(rest.substr(0, cut)));
      rest = text::trim(rest.substr(cut));
    }
    if (!rest.empty()) pieces.emplace_back(rest);
  }
  std::vector<std::string> out;
  std::string current;
  for (auto& piece : pieces) {
    if (!current.empty() && current.size() + 1 + piece.size() > limit) {
      out.push_back(std::move(current));
      current.clear();
    }
    if (!current.empty()) current += ' ';
    current += piece;
  }
  if (!current.empty()) out.push_back(std::move(current));
  return out;
}

}  // namespace

std::vector<Block> segment_answer(const Answer& answer, Workload workload, const SegmentOptions& options) {
  if (workload == Workload::short_form) return {Block{0, std::string(text::trim(answer.text))}};

  std::vector<std::string> merged;
  std::string pending;
  for (auto& p : paragraphs_of(answer.text)) {
    if (!pending.empty()) pending += "\n\n";
    pending += p;
    if (is_fragment(p, options.coalesce_below)) continue;
    merged.push_back(std::move(pending));
    pending.clear();
  }
  if (!pending.empty()) merged.push_back(std::move(pending));

  std::vector<Block> blocks;
  for (const auto& m : merged)
    for (auto& piece : split_long(m, options.split_above)) blocks.push_back(Block{blocks.size(), std::move(piece)});
  if (blocks.empty()) blocks.push_back(Block{0, ""});
  return blocks;
}

std::vector<Judgment> verify_blocks(const Question& question, const std::vector<Block>& blocks,
                                    const RubricSet& rubrics, judge::Judge& judge, judge::LabelFormat format,
                                    JudgeMode mode, const VerifyOptions& options) {
  if (rubrics.rubrics.empty()) {
    spdlog::warn("question {} has no rubrics; nothing to verify", question.id);
    return {};
  }
  const std::size_t cap = options.batch_cap;
  if (cap == 0 || cap > kMaxRubricsPerBatch)
    throw Error(ErrorCode::ConfigError, "batch cap must be in 1.." + std::to_string(kMaxRubricsPerBatch));

  struct Task {
    std::size_t block;
    std::size_t first;
    std::size_t count;
  };
  std::vector<Task> tasks;
  for (std::size_t b = 0; b < blocks.size(); ++b) {
    if (text::trim(blocks[b].text).empty()) continue;
    for (std::size_t first = 0; first < rubrics.rubrics.size(); first += cap)
      tasks.push_back({b, first, std::min(cap, rubrics.rubrics.size() - first)});
  }

  const auto n_rubrics = rubrics.rubrics.size();
  std::vector<SupportLabel> labels(blocks.size() * n_rubrics, SupportLabel::not_support);
  parallel_for(tasks.size(), options.workers, [&](std::size_t t) {
    const auto& task = tasks[t];
    std::span<const Rubric> batch(rubrics.rubrics.data() + task.first, task.count);
    auto result = judge.verify_rubrics(question, blocks[task.block], batch, format, mode);
    for (std::size_t i = 0; i < task.count; ++i) labels[task.block * n_rubrics + task.first + i] = result[i];
  });

  std::vector<Judgment> out;
  out.reserve(labels.size());
  for (std::size_t b = 0; b < blocks.size(); ++b)
    for (std::size_t r = 0; r < n_rubrics; ++r)
      out.push_back(Judgment{rubrics.rubrics[r].id, blocks[b].index, labels[b * n_rubrics + r]});
  return out;
}

std::vector<Judgment> verify_answer(const Question& question, const Answer& answer, const RubricSet& rubrics,
                                    judge::Judge& judge, judge::LabelFormat format, JudgeMode mode,
                                    const VerifyOptions& options) {
  return verify_blocks(question, segment_answer(answer, question.workload, options.segment), rubrics, judge, format,
                       mode, options);
}

namespace {

// Fixed stack storage for the usual handful of blocks and rubrics, heap
// beyond that. aggregate() runs once per answer inside training loops.
template <typename T, std::size_t N>
class Scratch {
 public:
  Scratch(std::size_t size, T fill) : size_(size) {
    if (size > N) heap_.assign(size, fill);
    else std::fill_n(stack_.begin(), size, fill);
  }
  T* begin() { return size_ > N ? heap_.data() : stack_.data(); }
  T* end() { return begin() + size_; }

 private:
  std::array<T, N> stack_;
  std::vector<T> heap_;
  std::size_t size_;
};

}  // namespace

std::vector<AggregatedLabel> aggregate(const std::vector<Judgment>& judgments, const RubricSet& rubrics,
                                       std::optional<std::size_t> block_count) {
  // Sorted block universe.
  Scratch<std::size_t, 64> universe(block_count ? *block_count : judgments.size(), 0);
  std::size_t* first_block = universe.begin();
  std::size_t block_total = 0;
  if (block_count) {
    for (std::size_t b = 0; b < *block_count; ++b) first_block[b] = b;
    block_total = *block_count;
  } else {
    for (std::size_t i = 0; i < judgments.size(); ++i) first_block[i] = judgments[i].block_index;
    std::sort(first_block, universe.end());
    block_total = static_cast<std::size_t>(std::unique(first_block, universe.end()) - first_block);
  }
  const bool dense = block_total == 0 || first_block[block_total - 1] + 1 == block_total;
  auto block_slot = [&](std::size_t index) -> std::size_t {
    if (dense) return index < block_total ? index : block_total;
    const std::size_t* it = std::lower_bound(first_block, first_block + block_total, index);
    return it != first_block + block_total && *it == index ? static_cast<std::size_t>(it - first_block) : block_total;
  };

  const auto& list = rubrics.rubrics;
  const std::size_t rubric_total = list.size();
  std::unordered_map<std::string_view, std::size_t> position;
  constexpr std::size_t kLinearScan = 16;
  if (rubric_total > kLinearScan)
    for (std::size_t i = 0; i < rubric_total; ++i) position.emplace(list[i].id, i);
  // Ids are short; a byte loop beats a libc call here.
  auto same = [](const std::string& a, const std::string& b) {
    if (a.size() != b.size()) return false;
    for (std::size_t i = 0; i < a.size(); ++i)
      if (a[i] != b[i]) return false;
    return true;
  };
  // Judgments usually arrive in rubric order, so try the successor first.
  std::size_t guess = 0;
  auto rubric_slot = [&](const std::string& id) -> std::size_t {
    if (guess < rubric_total && same(list[guess].id, id)) return guess;
    if (rubric_total > kLinearScan) {
      auto it = position.find(id);
      return it == position.end() ? rubric_total : it->second;
    }
    for (std::size_t i = 0; i < rubric_total; ++i)
      if (same(list[i].id, id)) return i;
    return rubric_total;
  };

  Scratch<unsigned char, 256> judged_buffer(rubric_total * block_total, 0);
  Scratch<SupportLabel, 64> best_buffer(rubric_total, SupportLabel::not_support);
  unsigned char* judged = judged_buffer.begin();
  SupportLabel* best = best_buffer.begin();
  for (const auto& j : judgments) {
    const std::size_t r = rubric_slot(j.rubric_id);
    if (r == rubric_total) throw Error(ErrorCode::IncompleteCoverage, "judgment for unknown rubric " + j.rubric_id);
    const std::size_t b = block_slot(j.block_index);
    if (b == block_total)
      throw Error(ErrorCode::IncompleteCoverage, "judgment for unknown block " + std::to_string(j.block_index));
    judged[r * block_total + b] = 1;
    best[r] = label_max(best[r], j.label);
    guess = r + 1 == rubric_total ? 0 : r + 1;
  }

  std::vector<AggregatedLabel> out;
  out.reserve(rubric_total);
  for (std::size_t r = 0; r < rubric_total; ++r) {
    if (block_total == 0) throw Error(ErrorCode::IncompleteCoverage, "rubric " + list[r].id + " was never judged");
    for (std::size_t b = 0; b < block_total; ++b)
      if (!judged[r * block_total + b])
        throw Error(ErrorCode::IncompleteCoverage,
                    "rubric " + list[r].id + " has no judgment for block " + std::to_string(first_block[b]));
    out.emplace_back(list[r].id, best[r]);
  }
  return out;
}

RewardScore reward(const RubricSet& rubrics, const std::vector<AggregatedLabel>& aggregated) {
  std::unordered_map<std::string, SupportLabel> by_id;
  for (const auto& [id, label] : aggregated) {
    if (!rubrics.find(id)) throw Error(ErrorCode::CoverageMismatch, "label for unknown rubric " + id);
    if (!by_id.emplace(id, label).second) throw Error(ErrorCode::CoverageMismatch, "rubric " + id + " labelled twice");
  }
  if (by_id.size() != rubrics.rubrics.size()) {
    for (const auto& r : rubrics.rubrics)
      if (!by_id.contains(r.id)) throw Error(ErrorCode::CoverageMismatch, "rubric " + r.id + " has no label");
  }

  RewardScore score;
  if (rubrics.rubrics.empty()) {
    spdlog::warn("question {} has an empty rubric set; reward is 0", rubrics.question_id);
    return score;
  }
  const double total = rubrics.total_weight();
  double numerator = 0.0;
  for (const auto& r : rubrics.rubrics) {
    const auto label = by_id.at(r.id);
    const double earned = r.weight * label_value(label);
    numerator += earned;
    score.per_rubric.push_back(RubricContribution{r.id, label, earned / total});
  }
  score.value = numerator / total;
  return score;
}

std::string normalize_answer(std::string_view s) {
  std::string stripped;
  stripped.reserve(s.size());
  for (unsigned char c : s)
    if (!std::ispunct(c)) stripped += static_cast<char>(std::tolower(c));
  std::string out;
  std::size_t pos = 0;
  while (pos < stripped.size()) {
    while (pos < stripped.size() && std::isspace(static_cast<unsigned char>(stripped[pos]))) ++pos;
    const std::size_t start = pos;
    while (pos < stripped.size() && !std::isspace(static_cast<unsigned char>(stripped[pos]))) ++pos;
    const std::string_view word(stripped.data() + start, pos - start);
    if (word.empty() || word == "a" || word == "an" || word == "the") continue;
    if (!out.empty()) out += ' ';
    out += word;
  }
  return out;
}

bool em_match(std::string_view prediction, std::string_view ground_truth) {
  return normalize_answer(prediction) == normalize_answer(ground_truth);
}

HybridVerdict hybrid_verify(const Question& question, std::string_view prediction, std::string_view ground_truth,
                            judge::Judge& judge, judge::LabelFormat format) {
  const auto set = rubrics::short_form_rubric(question.id, ground_truth);
  if (em_match(prediction, ground_truth)) return {true, false};
  const Block block{0, std::string(text::trim(prediction))};
  if (block.text.empty()) return {false, false};
  const auto labels = judge.verify_rubrics(question, block, set.rubrics, format, JudgeMode::binary);
  return {labels.front() == SupportLabel::support, true};
}

}  // namespace nugget::verify
