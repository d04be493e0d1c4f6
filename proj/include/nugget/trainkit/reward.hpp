#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "nugget/core/json.hpp"
#include "nugget/core/labels.hpp"
#include "nugget/judge/label_format.hpp"

namespace nugget::trainkit {

// Plurality label; ties go to not_support, then partial_support. Throws
// DegenerateInput on an empty vote.
SupportLabel vote(std::span<const SupportLabel> votes);

// 1 iff the sequences are identical, else 0.
int exact_match_labels(std::span<const SupportLabel> pred, std::span<const SupportLabel> gold);

enum class ReasoningStatus { well_formed_nonempty, well_formed_empty, malformed };

struct CompositeRewardInput {
  // Empty when the final answer could not be parsed.
  std::vector<SupportLabel> pred_labels;
  std::vector<SupportLabel> gold_labels;
  ReasoningStatus reasoning_status = ReasoningStatus::malformed;
  bool output_format_ok = false;
  std::size_t response_length = 0;
  std::size_t max_response_length = 4096;
  std::size_t overlong_buffer = 2048;
  double penalty_factor = 1.0;
};

// Accuracy, reasoning-format and output-format terms weighted 35+35 / 20 / 10
// percent, minus the overlength penalty, clamped to [-penalty_factor, 1].
// The F1 term averages over the classes present in either sequence, so a
// perfect prediction earns the full 35.
double composite_reward(const CompositeRewardInput& input);

// Penalty subtracted for a response of `length` tokens: 0 up to
// max_length - buffer, rising linearly to `factor` at max_length.
double overlength_penalty(std::size_t length, std::size_t max_length, std::size_t buffer, double factor);

// Reads a raw verifier response: reasoning status from the tags, labels from
// the payload (empty and format not ok if unparseable).
CompositeRewardInput score_response(std::string_view raw, std::span<const SupportLabel> gold,
                                    judge::LabelFormat format, JudgeMode mode, std::size_t response_length);

// Keep a sample only when its label accuracy is strictly between 0 and 1.
bool dynamic_sampling_keep(std::span<const SupportLabel> pred, std::span<const SupportLabel> gold);

// (r - mean) / population std; all zeros when std < 1e-12. Throws
// GroupTooSmall for fewer than two rewards.
std::vector<double> group_advantage(std::span<const double> rewards);

// One sampled verifier response in a training group.
struct Rollout {
  std::string sample_id;
  std::string group_id;
  std::string response;
  std::vector<SupportLabel> gold_labels;
  judge::LabelFormat format = judge::LabelFormat::json;
  JudgeMode mode = JudgeMode::ternary;
  std::size_t response_length = 0;
};

struct FeedEntry {
  std::string sample_id;
  double composite_reward = 0.0;
  bool keep = false;
  std::string advantage_group_id;
  double advantage = 0.0;
};

void from_json(const Json& j, Rollout& r);
void to_json(Json& j, const FeedEntry& f);

struct FeedOptions {
  std::size_t max_response_length = 4096;
  std::size_t overlong_buffer = 2048;
  double penalty_factor = 1.0;
};

// Scores every rollout and normalises rewards within each group. Groups of
// one get advantage 0 with a warning. Output follows input order.
std::vector<FeedEntry> build_reward_feed(std::span<const Rollout> rollouts, const FeedOptions& options = {});

}  // namespace nugget::trainkit
