#include "nugget/trainkit/reward.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include <spdlog/spdlog.h>

#include "nugget/core/error.hpp"
#include "nugget/core/text.hpp"
#include "nugget/judge/reasoning.hpp"
#include "nugget/trainkit/metrics.hpp"

namespace nugget::trainkit {

namespace {

std::size_t whitespace_tokens(std::string_view s) {
  std::size_t count = 0;
  bool in_token = false;
  for (unsigned char c : s) {
    const bool space = std::isspace(c) != 0;
    if (!space && !in_token) ++count;
    in_token = !space;
  }
  return count;
}

}  // namespace

SupportLabel vote(std::span<const SupportLabel> votes) {
  if (votes.empty()) throw Error(ErrorCode::DegenerateInput, "cannot vote without votes");
  std::array<std::size_t, 3> counts{};
  for (auto v : votes) ++counts[static_cast<std::size_t>(v)];
  // Conservative priority on ties: not_support, then partial_support.
  SupportLabel best = SupportLabel::not_support;
  for (auto label : {SupportLabel::partial_support, SupportLabel::support})
    if (counts[static_cast<std::size_t>(label)] > counts[static_cast<std::size_t>(best)]) best = label;
  return best;
}

int exact_match_labels(std::span<const SupportLabel> pred, std::span<const SupportLabel> gold) {
  return std::equal(pred.begin(), pred.end(), gold.begin(), gold.end()) ? 1 : 0;
}

double overlength_penalty(std::size_t length, std::size_t max_length, std::size_t buffer, double factor) {
  const std::size_t free_limit = max_length > buffer ? max_length - buffer : 0;
  if (length <= free_limit) return 0.0;
  if (length >= max_length || buffer == 0) return factor;
  return factor * static_cast<double>(length - free_limit) / static_cast<double>(buffer);
}

double composite_reward(const CompositeRewardInput& in) {
  double f1 = 0.0;
  int em = 0;
  if (!in.pred_labels.empty()) {
    if (in.pred_labels.size() != in.gold_labels.size())
      throw Error(ErrorCode::LengthMismatch, "predicted " + std::to_string(in.pred_labels.size()) + " labels for " +
                                                 std::to_string(in.gold_labels.size()) + " gold labels");
    std::vector<SupportLabel> present;
    for (auto label : kAllLabels)
      if (std::find(in.pred_labels.begin(), in.pred_labels.end(), label) != in.pred_labels.end() ||
          std::find(in.gold_labels.begin(), in.gold_labels.end(), label) != in.gold_labels.end())
        present.push_back(label);
    f1 = macro_f1(in.pred_labels, in.gold_labels, present).macro_f1;
    em = exact_match_labels(in.pred_labels, in.gold_labels);
  }
  double reasoning = 0.0;
  if (in.reasoning_status == ReasoningStatus::well_formed_nonempty) reasoning = 1.0;
  if (in.reasoning_status == ReasoningStatus::well_formed_empty) reasoning = 0.5;
  const double format = in.output_format_ok ? 1.0 : 0.0;

  // Whole percentage points first, one division last: the documented
  // constants (1.0, 0.3, 0.0) come out exactly.
  const double base = (35.0 * f1 + 35.0 * em + 20.0 * reasoning + 10.0 * format) / 100.0;
  const double penalty =
      overlength_penalty(in.response_length, in.max_response_length, in.overlong_buffer, in.penalty_factor);
  return std::clamp(base - penalty, -in.penalty_factor, 1.0);
}

CompositeRewardInput score_response(std::string_view raw, std::span<const SupportLabel> gold,
                                    judge::LabelFormat format, JudgeMode mode, std::size_t response_length) {
  CompositeRewardInput in;
  in.gold_labels.assign(gold.begin(), gold.end());
  in.response_length = response_length;
  const auto split = judge::split_reasoning(raw);
  if (split.well_formed)
    in.reasoning_status = text::trim(split.reasoning).empty() ? ReasoningStatus::well_formed_empty
                                                               : ReasoningStatus::well_formed_nonempty;
  try {
    in.pred_labels = judge::parse_labels(split.payload, format, gold.size(), mode);
    in.output_format_ok = true;
  } catch (const Error& e) {
    if (!e.is_parse_error()) throw;
    in.pred_labels.clear();
    in.output_format_ok = false;
  }
  return in;
}

bool dynamic_sampling_keep(std::span<const SupportLabel> pred, std::span<const SupportLabel> gold) {
  const std::size_t n = gold.size();
  std::size_t correct = 0;
  for (std::size_t i = 0; i < std::min(n, pred.size()); ++i) correct += pred[i] == gold[i];
  return correct > 0 && correct < n;
}

std::vector<double> group_advantage(std::span<const double> rewards) {
  if (rewards.size() < 2) throw Error(ErrorCode::GroupTooSmall, "advantage needs a group of at least two rewards");
  const double n = static_cast<double>(rewards.size());
  double mean = 0.0;
  for (double r : rewards) mean += r;
  mean /= n;
  double var = 0.0;
  for (double r : rewards) var += (r - mean) * (r - mean);
  const double std = std::sqrt(var / n);
  std::vector<double> out(rewards.size(), 0.0);
  if (std < 1e-12) return out;
  for (std::size_t i = 0; i < rewards.size(); ++i) out[i] = (rewards[i] - mean) / std;
  return out;
}

void from_json(const Json& j, Rollout& r) {
  try {
    j.at("sample_id").get_to(r.sample_id);
    j.at("group_id").get_to(r.group_id);
    j.at("response").get_to(r.response);
    r.gold_labels = j.at("gold_labels").get<std::vector<SupportLabel>>();
    const auto format = j.value("format", std::string("json"));
    const auto f = judge::label_format_from_string(format);
    if (!f) throw Error(ErrorCode::SchemaViolation, "unknown label format " + format);
    r.format = *f;
    const auto mode = judge_mode_from_string(j.value("mode", std::string("ternary")));
    if (!mode) throw Error(ErrorCode::SchemaViolation, "unknown judge mode");
    r.mode = *mode;
    // Without a tokenizer, whitespace tokens stand in for model tokens.
    r.response_length = j.contains("response_length") ? j.at("response_length").get<std::size_t>()
                                                      : whitespace_tokens(r.response);
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::SchemaViolation, std::string("rollout: ") + e.what());
  }
}

void to_json(Json& j, const FeedEntry& f) {
  j = Json{{"sample_id", f.sample_id},
           {"composite_reward", f.composite_reward},
           {"keep", f.keep},
           {"advantage_group_id", f.advantage_group_id},
           {"advantage", f.advantage}};
}

std::vector<FeedEntry> build_reward_feed(std::span<const Rollout> rollouts, const FeedOptions& options) {
  std::vector<FeedEntry> feed;
  feed.reserve(rollouts.size());
  std::map<std::string, std::vector<std::size_t>> groups;
  for (const auto& r : rollouts) {
    auto in = score_response(r.response, r.gold_labels, r.format, r.mode, r.response_length);
    in.max_response_length = options.max_response_length;
    in.overlong_buffer = options.overlong_buffer;
    in.penalty_factor = options.penalty_factor;
    FeedEntry entry;
    entry.sample_id = r.sample_id;
    entry.composite_reward = composite_reward(in);
    entry.keep = dynamic_sampling_keep(in.pred_labels, in.gold_labels);
    entry.advantage_group_id = r.group_id;
    groups[r.group_id].push_back(feed.size());
    feed.push_back(std::move(entry));
  }
  for (const auto& [group, members] : groups) {
    if (members.size() < 2) {
      spdlog::warn("group {} has a single rollout; its advantage is 0", group);
      continue;
    }
    std::vector<double> rewards;
    for (auto i : members) rewards.push_back(feed[i].composite_reward);
    const auto adv = group_advantage(rewards);
    for (std::size_t k = 0; k < members.size(); ++k) feed[members[k]].advantage = adv[k];
  }
  return feed;
}

}  // namespace nugget::trainkit
