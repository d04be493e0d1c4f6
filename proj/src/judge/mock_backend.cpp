#include "nugget/judge/mock_backend.hpp"

#include <fstream>

#include "nugget/core/error.hpp"
#include "nugget/judge/label_format.hpp"

namespace nugget::judge {

namespace {

std::string wrap(const std::string& reasoning, const std::string& payload) {
  return "<reasoning>" + reasoning + "</reasoning>\n" + payload;
}

bool is_verify(TemplateId id) { return id == TemplateId::verify_ternary || id == TemplateId::verify_binary; }

}  // namespace

void from_json(const Json& j, MockRule& rule) {
  try {
    if (j.contains("template")) {
      const auto name = j.at("template").get<std::string>();
      rule.template_id = template_from_string(name);
      if (!rule.template_id) throw Error(ErrorCode::ConfigError, "mock rule: unknown template '" + name + "'");
    }
    if (j.contains("when")) rule.when = j.at("when").get<std::map<std::string, std::string>>();
    if (j.contains("attempt")) rule.attempt = j.at("attempt").get<int>();
    if (j.contains("raw")) rule.raw = j.at("raw").get<std::string>();
    if (j.contains("payload")) rule.payload = j.at("payload").get<std::string>();
    if (j.contains("reasoning")) rule.reasoning = j.at("reasoning").get<std::string>();
    if (j.contains("item")) rule.item = j.at("item").get<std::string>();
    if (j.contains("token")) rule.token = j.at("token").get<std::string>();
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::ConfigError, std::string("mock rule: ") + e.what());
  }
  const bool whole = rule.raw || rule.payload;
  const bool itemised = rule.item || rule.token;
  if (whole == itemised)
    throw Error(ErrorCode::ConfigError, "mock rule needs either raw/payload or item+token");
  if (itemised && !(rule.item && rule.token)) throw Error(ErrorCode::ConfigError, "mock item rule needs both item and token");
}

MockChatBackend::MockChatBackend(std::vector<MockRule> rules, std::string model) : model_(std::move(model)) {
  for (auto& rule : rules) {
    Compiled c{rule, {}, std::nullopt};
    try {
      for (const auto& [var, pattern] : rule.when) c.when.emplace_back(var, std::regex(pattern));
      if (rule.item) c.item = std::regex(*rule.item, std::regex::icase);
    } catch (const std::regex_error& e) {
      throw Error(ErrorCode::ConfigError, std::string("mock rule regex: ") + e.what());
    }
    if (rule.token && rule.template_id && is_verify(*rule.template_id) && !label_from_string(*rule.token))
      throw Error(ErrorCode::ConfigError, "mock verify rule token '" + *rule.token + "' is not a label");
    rules_.push_back(std::move(c));
  }
}

std::shared_ptr<MockChatBackend> MockChatBackend::from_json(const Json& spec) {
  std::vector<MockRule> rules;
  if (spec.contains("rules")) rules = spec.at("rules").get<std::vector<MockRule>>();
  auto backend = std::make_shared<MockChatBackend>(std::move(rules), spec.value("model", std::string("mock-judge")));
  if (spec.contains("default_verify_label")) {
    auto label = label_from_string(spec.at("default_verify_label").get<std::string>());
    if (!label) throw Error(ErrorCode::ConfigError, "mock: bad default_verify_label");
    backend->set_default_verify_label(*label);
  }
  if (spec.contains("default_weight")) {
    auto weight = weight_class_from_string(spec.at("default_weight").get<std::string>());
    if (!weight) throw Error(ErrorCode::ConfigError, "mock: bad default_weight");
    backend->set_default_weight(*weight);
  }
  return backend;
}

std::shared_ptr<MockChatBackend> MockChatBackend::from_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open mock rules " + path.string());
  Json spec;
  try {
    spec = Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw Error(ErrorCode::ConfigError, path.string() + ": " + e.what());
  }
  return from_json(spec);
}

bool MockChatBackend::matches(const Compiled& c, const ChatRequest& request) const {
  if (c.rule.template_id && *c.rule.template_id != request.template_id) return false;
  if (c.rule.attempt && *c.rule.attempt != request.attempt) return false;
  for (const auto& [var, pattern] : c.when) {
    const std::string* value = nullptr;
    if (auto it = request.vars.find(var); it != request.vars.end())
      value = &it->second;
    else if (auto mt = request.meta.find(var); mt != request.meta.end())
      value = &mt->second;
    if (!value || !std::regex_search(*value, pattern)) return false;
  }
  return true;
}

std::string MockChatBackend::itemised_reply(const ChatRequest& request) const {
  std::vector<std::string> tokens;
  for (const auto& item : request.items) {
    std::optional<std::string> token;
    for (const auto& c : rules_) {
      if (!c.item || !matches(c, request)) continue;
      if (std::regex_search(item, *c.item)) {
        token = c.rule.token;
        break;
      }
    }
    if (!token)
      token = std::string(is_verify(request.template_id) ? to_string(default_label_) : to_string(default_weight_));
    tokens.push_back(*token);
  }

  if (!is_verify(request.template_id)) {
    std::string out;
    for (std::size_t i = 0; i < tokens.size(); ++i) out += (i ? "\n" : "") + tokens[i];
    return wrap("scripted weights", out);
  }
  std::vector<SupportLabel> labels;
  for (const auto& t : tokens) labels.push_back(*label_from_string(t));
  auto format = LabelFormat::json;
  if (auto it = request.meta.find("format"); it != request.meta.end())
    if (auto f = label_format_from_string(it->second)) format = *f;
  return wrap("scripted labels", serialize_labels(labels, format));
}

std::string MockChatBackend::complete(const ChatRequest& request) {
  ++calls_;
  for (const auto& c : rules_) {
    if (c.item || !matches(c, request)) continue;
    if (c.rule.raw) return *c.rule.raw;
    return wrap(c.rule.reasoning, *c.rule.payload);
  }
  switch (request.template_id) {
    case TemplateId::rewrite:
    case TemplateId::nugget_creator:
      return wrap("nothing to add", "[None]");
    case TemplateId::dedup:
      return wrap("no similar query", "False");
    case TemplateId::temporal:
      return wrap("no time constraint", "True");
    case TemplateId::nugget_merger:
      return wrap("nothing to merge", "[NO NEED]");
    case TemplateId::nugget_scorer:
    case TemplateId::verify_ternary:
    case TemplateId::verify_binary:
      return itemised_reply(request);
  }
  return {};
}

}  // namespace nugget::judge
