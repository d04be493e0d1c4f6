#pragma once

#include <atomic>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <regex>
#include <string>
#include <vector>

#include "nugget/core/json.hpp"
#include "nugget/judge/backend.hpp"

namespace nugget::judge {

// One scripted reply. A rule matches a request when its template (if set)
// equals the request's template, its attempt (if set) equals the request's
// attempt, and every `when` regex is found in the named template variable.
//
// Whole-response rules carry `raw` (returned verbatim) or `payload` (wrapped
// as "<reasoning>{reasoning}</reasoning>\n{payload}"). Item rules carry an
// `item` regex and a `token`; for list-labelling templates (verification and
// weighting) each enumerated item receives the token of the first item rule
// that matches it.
struct MockRule {
  std::optional<TemplateId> template_id;
  std::map<std::string, std::string> when;
  std::optional<int> attempt;
  std::optional<std::string> raw;
  std::optional<std::string> payload;
  std::string reasoning = "scripted reply";
  std::optional<std::string> item;
  std::optional<std::string> token;
};

void from_json(const Json& j, MockRule& rule);

// Deterministic stand-in for a remote judge, driven by a rules file:
//   {"rules": [ {"template": "rewrite", "when": {"passage": "..."}, "payload": "q1\nq2"},
//               {"template": "verify_ternary", "item": "Paris", "token": "support"} ],
//    "default_verify_label": "not_support", "default_weight": "vital"}
//
// Unmatched requests get neutral replies: no rewrites, not a duplicate,
// temporally valid, no nuggets, no merge needed, the default weight per
// nugget, and the default label per rubric.
class MockChatBackend : public ChatBackend {
 public:
  explicit MockChatBackend(std::vector<MockRule> rules = {}, std::string model = "mock-judge");

  static std::shared_ptr<MockChatBackend> from_json(const Json& spec);
  static std::shared_ptr<MockChatBackend> from_file(const std::filesystem::path& path);

  std::string complete(const ChatRequest& request) override;
  std::string model_name() const override { return model_; }

  void set_default_verify_label(SupportLabel label) { default_label_ = label; }
  void set_default_weight(WeightClass weight) { default_weight_ = weight; }

  std::size_t calls() const noexcept { return calls_.load(); }

 private:
  struct Compiled {
    MockRule rule;
    std::vector<std::pair<std::string, std::regex>> when;
    std::optional<std::regex> item;
  };

  bool matches(const Compiled& rule, const ChatRequest& request) const;
  std::string itemised_reply(const ChatRequest& request) const;

  std::vector<Compiled> rules_;
  std::string model_;
  SupportLabel default_label_ = SupportLabel::not_support;
  WeightClass default_weight_ = WeightClass::vital;
  std::atomic<std::size_t> calls_{0};
};

}  // namespace nugget::judge
