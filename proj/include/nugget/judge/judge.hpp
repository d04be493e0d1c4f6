#pragma once

#include <chrono>
#include <cstddef>
#include <filesystem>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <semaphore>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "nugget/core/error.hpp"
#include "nugget/core/types.hpp"
#include "nugget/judge/backend.hpp"
#include "nugget/judge/cache.hpp"
#include "nugget/judge/exchange.hpp"
#include "nugget/judge/label_format.hpp"
#include "nugget/judge/reasoning.hpp"

namespace nugget::judge {

struct JudgeConfig {
  std::string endpoint_url;
  std::string model_name;
  std::string api_key_env_var_name;
  int max_retries = 2;
  std::chrono::milliseconds request_timeout{60000};
  double temperature = 0.0;
  std::optional<std::filesystem::path> cache_dir;
  std::size_t max_in_flight = 4;

  // Throws ConfigError unless max_retries >= 0, timeout > 0, max_in_flight > 0.
  void validate() const;
};

// A nugget produced by the merger and the 1-based input indices folded into it.
struct MergeGroup {
  std::string text;
  std::vector<std::size_t> source_indices;

  bool operator==(const MergeGroup&) const = default;
};

struct VerifyResult {
  std::vector<SupportLabel> labels;
  std::string reasoning;
  std::string raw_response;
};

// Payload parsers behind the judge operations. They see only the text after
// </reasoning> and throw the parse errors listed on each operation.
std::vector<std::string> parse_line_list(std::string_view payload, std::size_t max_items,
                                         std::string_view what);
bool parse_boolean(std::string_view payload);
std::vector<MergeGroup> parse_merge_groups(std::string_view payload, std::size_t nugget_count);
std::vector<WeightClass> parse_weights(std::string_view payload, std::size_t nugget_count);

// Client for the LLM judge. Every operation renders its prompt template,
// consults the response cache, calls the backend, and parses the reply. A
// reply that fails to parse is re-asked with a corrective note naming the
// violated constraint, at most `max_retries` times.
//
// Safe for concurrent use; at most `max_in_flight` backend calls run at once.
class Judge {
 public:
  Judge(std::shared_ptr<ChatBackend> backend, JudgeConfig config);

  // Up to `max_new` rewritten queries; "[None]" yields none.
  std::vector<std::string> rewrite_queries(const Question& question, std::string_view query,
                                           const Passage& passage, std::size_t max_new);

  // True when `candidate` is similar to any of `existing` (non-empty).
  bool is_duplicate_query(std::string_view candidate, std::span<const std::string> existing);

  // True when `passage` satisfies the time constraint of `query`.
  bool check_temporal(std::string_view query, const Passage& passage);

  std::vector<std::string> extract_nuggets(const Question& question, const Passage& passage,
                                           std::size_t max_nuggets);

  // Groups partition 1..nuggets.size(); "[NO NEED]" yields singletons.
  std::vector<MergeGroup> merge_nuggets(const Question& question, std::span<const std::string> nuggets);

  std::vector<WeightClass> assign_weights(const Question& question, std::span<const std::string> nuggets);

  // Labels for 1..10 rubrics against one block, in rubric order. Throws
  // VerificationFailed once retries are exhausted.
  std::vector<SupportLabel> verify_rubrics(const Question& question, const Block& block,
                                           std::span<const Rubric> rubrics, LabelFormat format,
                                           JudgeMode mode);

  // As verify_rubrics, also returning the reasoning. `sample` > 0 draws an
  // independent reply (it is part of the cache key), used for voting.
  VerifyResult verify_rubrics_detailed(const Question& question, const Block& block,
                                       std::span<const Rubric> rubrics, LabelFormat format,
                                       JudgeMode mode, int sample = 0);

  // Logical operations issued, including cache hits.
  std::size_t requests() const;
  // Calls that reached the backend.
  std::size_t backend_calls() const;
  std::vector<JudgeExchange> exchanges() const;

  const JudgeConfig& config() const noexcept { return config_; }

 private:
  template <typename T>
  T ask(ChatRequest request, const std::function<T(const JudgeExchange&)>& parse,
        std::optional<ErrorCode> exhausted_code);

  JudgeExchange call(const ChatRequest& request);

  std::shared_ptr<ChatBackend> backend_;
  JudgeConfig config_;
  ResponseCache cache_;
  std::counting_semaphore<1024> in_flight_;
  mutable std::mutex log_mutex_;
  std::vector<JudgeExchange> log_;
  std::size_t requests_ = 0;
  std::size_t backend_calls_ = 0;
};

// Builds an HTTP-backed judge from the config.
std::shared_ptr<Judge> make_http_judge(const JudgeConfig& config);

}  // namespace nugget::judge
