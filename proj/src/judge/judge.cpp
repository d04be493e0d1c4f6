#include "nugget/judge/judge.hpp"

#include <regex>
#include <set>

#include <spdlog/spdlog.h>

#include "nugget/core/error.hpp"
#include "nugget/core/text.hpp"
#include "nugget/judge/http_backend.hpp"

namespace nugget::judge {

namespace {

std::string enumerate(std::span<const std::string> items, std::string_view open, std::string_view close) {
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i)
    out += "\n" + std::string(open) + std::to_string(i + 1) + std::string(close) + " " + items[i];
  return out;
}

std::vector<std::string_view> payload_lines(std::string_view payload) {
  std::vector<std::string_view> out;
  for (auto line : text::split_lines(payload)) {
    line = text::trim(line);
    if (!line.empty()) out.push_back(line);
  }
  return out;
}

const JudgeConfig& validated(const JudgeConfig& config) {
  config.validate();
  return config;
}

ResponseCache open_cache(const JudgeConfig& config) {
  if (config.cache_dir) return ResponseCache(*config.cache_dir);
  return ResponseCache();
}

}  // namespace

void JudgeConfig::validate() const {
  if (max_retries < 0) throw Error(ErrorCode::ConfigError, "judge max_retries must be >= 0");
  if (request_timeout.count() <= 0) throw Error(ErrorCode::ConfigError, "judge request_timeout must be positive");
  if (max_in_flight == 0 || max_in_flight > 1024)
    throw Error(ErrorCode::ConfigError, "judge max_in_flight must be in 1..1024");
}

std::vector<std::string> parse_line_list(std::string_view payload, std::size_t max_items, std::string_view what) {
  auto lines = payload_lines(payload);
  if (lines.size() == 1 && text::to_lower(lines[0]) == "[none]") return {};
  if (lines.size() > max_items) {
    spdlog::warn("judge returned {} {} (limit {}); keeping the first {}", lines.size(), what, max_items, max_items);
    lines.resize(max_items);
  }
  return {lines.begin(), lines.end()};
}

bool parse_boolean(std::string_view payload) {
  auto token = text::to_lower(text::trim(payload));
  if (!token.empty() && token.back() == '.') token.pop_back();
  if (token == "true") return true;
  if (token == "false") return false;
  throw Error(ErrorCode::UnparseablePayload, "expected True or False, got '" + std::string(text::trim(payload)) + "'");
}

std::vector<MergeGroup> parse_merge_groups(std::string_view payload, std::size_t nugget_count) {
  auto lines = payload_lines(payload);
  std::vector<MergeGroup> groups;
  if (lines.size() == 1 && text::to_lower(lines[0]) == "[no need]") {
    for (std::size_t i = 1; i <= nugget_count; ++i) groups.push_back({"", {i}});
    return groups;
  }
  static const std::regex line_pattern(R"(^(.*\S)\s*\[\s*(\d+(?:\s*,\s*\d+)*)\s*\]$)");
  static const std::regex number(R"(\d+)");
  std::set<std::size_t> seen;
  for (auto line : lines) {
    std::match_results<std::string_view::const_iterator> m;
    if (!std::regex_match(line.begin(), line.end(), m, line_pattern))
      throw Error(ErrorCode::UnparseableLine, "merged nugget line lacks an index list: '" + std::string(line) + "'");
    MergeGroup group{m[1].str(), {}};
    const std::string indices = m[2].str();
    for (auto it = std::sregex_iterator(indices.begin(), indices.end(), number); it != std::sregex_iterator(); ++it) {
      const std::size_t index = std::stoul(it->str());
      if (index < 1 || index > nugget_count)
        throw Error(ErrorCode::CoverageViolation, "index " + std::to_string(index) + " is out of range");
      if (!seen.insert(index).second)
        throw Error(ErrorCode::CoverageViolation, "index " + std::to_string(index) + " appears in two groups");
      group.source_indices.push_back(index);
    }
    groups.push_back(std::move(group));
  }
  if (seen.size() != nugget_count) {
    for (std::size_t i = 1; i <= nugget_count; ++i)
      if (!seen.contains(i))
        throw Error(ErrorCode::CoverageViolation, "index " + std::to_string(i) + " is not assigned to any group");
  }
  return groups;
}

std::vector<WeightClass> parse_weights(std::string_view payload, std::size_t nugget_count) {
  std::vector<WeightClass> out;
  for (auto line : payload_lines(payload)) {
    auto weight = weight_class_from_string(text::to_lower(line));
    if (!weight) throw Error(ErrorCode::UnknownToken, "'" + std::string(line) + "' is neither vital nor okay");
    out.push_back(*weight);
  }
  if (out.size() != nugget_count)
    throw Error(ErrorCode::CountMismatch,
                "expected " + std::to_string(nugget_count) + " weights, found " + std::to_string(out.size()));
  return out;
}

Judge::Judge(std::shared_ptr<ChatBackend> backend, JudgeConfig config)
    : backend_(std::move(backend)),
      config_(validated(config)),
      cache_(open_cache(config_)),
      in_flight_(static_cast<std::ptrdiff_t>(config_.max_in_flight)) {
  if (!backend_) throw Error(ErrorCode::ConfigError, "judge backend is null");
}

JudgeExchange Judge::call(const ChatRequest& request) {
  const auto key = cache_key(backend_->model_name(), request.prompt, config_.temperature, request.sample);
  JudgeExchange exchange;
  if (auto cached = cache_.get(key)) {
    exchange = std::move(*cached);
    exchange.attempt = request.attempt;
  } else {
    std::string raw;
    in_flight_.acquire();
    try {
      raw = backend_->complete(request);
    } catch (const Error&) {
      in_flight_.release();
      throw;
    } catch (const std::exception& e) {
      in_flight_.release();
      throw Error(ErrorCode::JudgeUnavailable, e.what());
    }
    in_flight_.release();
    auto split = split_reasoning(raw);
    exchange = JudgeExchange{request.template_id, request.prompt, std::move(raw), std::move(split.reasoning),
                             std::move(split.payload), request.attempt};
    cache_.put(key, exchange);
    std::lock_guard lock(log_mutex_);
    ++backend_calls_;
  }
  std::lock_guard lock(log_mutex_);
  log_.push_back(exchange);
  return exchange;
}

template <typename T>
T Judge::ask(ChatRequest request, const std::function<T(const JudgeExchange&)>& parse,
             std::optional<ErrorCode> exhausted_code) {
  {
    std::lock_guard lock(log_mutex_);
    ++requests_;
  }
  const std::string base_prompt = request.prompt;
  std::optional<Error> last_error;
  std::string last_raw;
  for (int attempt = 0; attempt <= config_.max_retries; ++attempt) {
    request.attempt = attempt;
    if (last_error)
      request.prompt = base_prompt + "\n\nYour response on attempt " + std::to_string(attempt) +
                       " was rejected: " + last_error->what() +
                       ". Reply again and follow the required output format exactly.";
    auto exchange = call(request);
    try {
      return parse(exchange);
    } catch (const Error& e) {
      if (!e.is_parse_error()) throw;
      spdlog::debug("{} reply rejected on attempt {}: {}", to_string(request.template_id), attempt + 1, e.what());
      last_error = e;
      last_raw = exchange.raw_response;
    }
  }
  spdlog::warn("{} reply still invalid after {} attempts; last response: {}", to_string(request.template_id),
               config_.max_retries + 1, last_raw);
  const ErrorCode code = exhausted_code.value_or(last_error->code());
  throw Error(code, std::string(to_string(request.template_id)) + " gave no valid reply after " +
                        std::to_string(config_.max_retries + 1) + " attempts (" + last_error->what() + ")");
}

std::vector<std::string> Judge::rewrite_queries(const Question& question, std::string_view query,
                                                const Passage& passage, std::size_t max_new) {
  if (max_new == 0) throw Error(ErrorCode::ConfigError, "rewrite_queries needs max_new >= 1");
  ChatRequest request;
  request.template_id = TemplateId::rewrite;
  request.vars = {{"max_num_new_queries", std::to_string(max_new)},
                  {"question", question.text},
                  {"query", std::string(query)},
                  {"passage", passage.text}};
  request.prompt = render(request.template_id, request.vars);
  return ask<std::vector<std::string>>(
      std::move(request),
      [max_new](const JudgeExchange& e) { return parse_line_list(e.payload, max_new, "rewritten queries"); },
      std::nullopt);
}

bool Judge::is_duplicate_query(std::string_view candidate, std::span<const std::string> existing) {
  if (existing.empty()) throw Error(ErrorCode::ConfigError, "is_duplicate_query needs existing queries");
  ChatRequest request;
  request.template_id = TemplateId::dedup;
  std::string listed;
  for (const auto& q : existing) listed += "\n- " + q;
  request.vars = {{"rewritten_query", std::string(candidate)}, {"existing_queries", listed}};
  request.items.assign(existing.begin(), existing.end());
  request.prompt = render(request.template_id, request.vars);
  return ask<bool>(
      std::move(request), [](const JudgeExchange& e) { return parse_boolean(e.payload); },
      ErrorCode::UnparseablePayload);
}

bool Judge::check_temporal(std::string_view query, const Passage& passage) {
  ChatRequest request;
  request.template_id = TemplateId::temporal;
  request.vars = {{"query", std::string(query)}, {"passage", passage.text}};
  request.prompt = render(request.template_id, request.vars);
  return ask<bool>(
      std::move(request), [](const JudgeExchange& e) { return parse_boolean(e.payload); },
      ErrorCode::UnparseablePayload);
}

std::vector<std::string> Judge::extract_nuggets(const Question& question, const Passage& passage,
                                                std::size_t max_nuggets) {
  if (max_nuggets == 0) throw Error(ErrorCode::ConfigError, "extract_nuggets needs max_nuggets >= 1");
  ChatRequest request;
  request.template_id = TemplateId::nugget_creator;
  request.vars = {{"creator_max_nuggets", std::to_string(max_nuggets)},
                  {"question", question.text},
                  {"passage", passage.text}};
  request.prompt = render(request.template_id, request.vars);
  return ask<std::vector<std::string>>(
      std::move(request),
      [max_nuggets](const JudgeExchange& e) { return parse_line_list(e.payload, max_nuggets, "nuggets"); },
      std::nullopt);
}

std::vector<MergeGroup> Judge::merge_nuggets(const Question& question, std::span<const std::string> nuggets) {
  if (nuggets.empty()) throw Error(ErrorCode::ConfigError, "merge_nuggets needs at least one nugget");
  ChatRequest request;
  request.template_id = TemplateId::nugget_merger;
  request.vars = {{"question", question.text}, {"nuggets", enumerate(nuggets, "[", "]")}};
  request.items.assign(nuggets.begin(), nuggets.end());
  request.prompt = render(request.template_id, request.vars);
  const std::size_t n = nuggets.size();
  auto groups = ask<std::vector<MergeGroup>>(
      std::move(request), [n](const JudgeExchange& e) { return parse_merge_groups(e.payload, n); }, std::nullopt);
  for (auto& g : groups)
    if (g.text.empty()) g.text = nuggets[g.source_indices.front() - 1];
  return groups;
}

std::vector<WeightClass> Judge::assign_weights(const Question& question, std::span<const std::string> nuggets) {
  if (nuggets.empty()) throw Error(ErrorCode::ConfigError, "assign_weights needs at least one nugget");
  ChatRequest request;
  request.template_id = TemplateId::nugget_scorer;
  request.vars = {{"num_nuggets", std::to_string(nuggets.size())},
                  {"question", question.text},
                  {"nuggets", enumerate(nuggets, "", ".")}};
  request.items.assign(nuggets.begin(), nuggets.end());
  request.prompt = render(request.template_id, request.vars);
  const std::size_t n = nuggets.size();
  return ask<std::vector<WeightClass>>(
      std::move(request), [n](const JudgeExchange& e) { return parse_weights(e.payload, n); }, std::nullopt);
}

std::vector<SupportLabel> Judge::verify_rubrics(const Question& question, const Block& block,
                                                std::span<const Rubric> rubrics, LabelFormat format,
                                                JudgeMode mode) {
  return verify_rubrics_detailed(question, block, rubrics, format, mode).labels;
}

VerifyResult Judge::verify_rubrics_detailed(const Question& question, const Block& block,
                                            std::span<const Rubric> rubrics, LabelFormat format, JudgeMode mode,
                                            int sample) {
  if (rubrics.empty() || rubrics.size() > kMaxRubricsPerBatch)
    throw Error(ErrorCode::ConfigError, "verify_rubrics takes 1.." + std::to_string(kMaxRubricsPerBatch) +
                                            " rubrics, got " + std::to_string(rubrics.size()));
  ChatRequest request;
  request.template_id = mode == JudgeMode::binary ? TemplateId::verify_binary : TemplateId::verify_ternary;
  for (const auto& r : rubrics) request.items.push_back(r.text);
  const auto count = std::to_string(rubrics.size());
  request.vars = {{"num_nuggets", count},
                  {"number_nuggets", count},
                  {"query", question.text},
                  {"passage", block.text},
                  {"format_instruction", std::string(instruction_text(format))},
                  {"nugget_list", enumerate(request.items, "", ".")}};
  request.meta = {{"format", std::string(to_string(format))}, {"block_index", std::to_string(block.index)}};
  request.sample = sample;
  request.prompt = render(request.template_id, request.vars);
  const std::size_t n = rubrics.size();
  try {
    return ask<VerifyResult>(
        std::move(request),
        [&](const JudgeExchange& e) {
          return VerifyResult{parse_labels(e.payload, format, n, mode), e.reasoning, e.raw_response};
        },
        ErrorCode::VerificationFailed);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::VerificationFailed) throw;
    std::string ids;
    for (const auto& r : rubrics) ids += (ids.empty() ? "" : ", ") + r.id;
    throw Error(ErrorCode::VerificationFailed,
                "block " + std::to_string(block.index) + " rubrics [" + ids + "]: " + e.what());
  }
}

std::size_t Judge::requests() const {
  std::lock_guard lock(log_mutex_);
  return requests_;
}

std::size_t Judge::backend_calls() const {
  std::lock_guard lock(log_mutex_);
  return backend_calls_;
}

std::vector<JudgeExchange> Judge::exchanges() const {
  std::lock_guard lock(log_mutex_);
  return log_;
}

std::shared_ptr<Judge> make_http_judge(const JudgeConfig& config) {
  net::HttpEndpoint endpoint{config.endpoint_url, config.model_name, config.api_key_env_var_name,
                             config.request_timeout, config.max_retries};
  return std::make_shared<Judge>(std::make_shared<HttpChatBackend>(std::move(endpoint), config.temperature),
                                 config);
}

}  // namespace nugget::judge
