#include "nugget/cli/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "nugget/core/error.hpp"
#include "nugget/core/hash.hpp"

namespace nugget::cli {

namespace {

[[noreturn]] void bad(const std::string& what) { throw Error(ErrorCode::ConfigError, what); }

// Reads one section, rejecting keys it does not know so typos surface early.
class Section {
 public:
  Section(const Json& doc, std::string name) : name_(std::move(name)) {
    if (doc.is_null()) return;
    if (!doc.is_object()) bad(name_ + " must be an object");
    doc_ = doc;
  }

  template <typename T>
  void get(const char* key, T& out) {
    known_.insert(key);
    auto it = doc_.find(key);
    if (it == doc_.end() || it->is_null()) return;
    try {
      out = it->get<T>();
    } catch (const Json::exception&) {
      bad(name_ + "." + key + " has the wrong type");
    }
  }

  template <typename T>
  void get(const char* key, std::optional<T>& out) {
    known_.insert(key);
    auto it = doc_.find(key);
    if (it == doc_.end() || it->is_null()) return;
    try {
      out = it->get<T>();
    } catch (const Json::exception&) {
      bad(name_ + "." + key + " has the wrong type");
    }
  }

  void path(const char* key, std::optional<std::filesystem::path>& out, const std::filesystem::path& base) {
    std::optional<std::string> raw;
    get(key, raw);
    if (raw) out = base / *raw;
  }

  const Json& sub(const char* key) {
    known_.insert(key);
    static const Json kNull;
    auto it = doc_.find(key);
    return it == doc_.end() ? kNull : *it;
  }

  void finish() const {
    for (const auto& [key, _] : doc_.items())
      if (!known_.count(key)) bad("unknown config key " + (name_.empty() ? key : name_ + "." + key));
  }

 private:
  std::string name_;
  Json doc_ = Json::object();
  std::set<std::string> known_;
};

judge::JudgeConfig read_judge(const Json& doc, const std::string& name, const std::filesystem::path& base,
                              judge::JudgeConfig config) {
  Section s(doc, name);
  s.get("endpoint_url", config.endpoint_url);
  s.get("model_name", config.model_name);
  s.get("api_key_env", config.api_key_env_var_name);
  s.get("max_retries", config.max_retries);
  long long timeout_ms = config.request_timeout.count();
  s.get("request_timeout_ms", timeout_ms);
  config.request_timeout = std::chrono::milliseconds(timeout_ms);
  s.get("temperature", config.temperature);
  std::optional<std::filesystem::path> cache;
  s.path("cache_dir", cache, base);
  if (cache) config.cache_dir = cache;
  s.get("max_in_flight", config.max_in_flight);
  s.finish();
  return config;
}

}  // namespace

void RunConfig::validate() const {
  judge.validate();
  teacher.validate();
  budget.validate();
  if (min_sentences == 0 || min_sentences > max_sentences)
    bad("segmentation needs 1 <= min_sentences <= max_sentences");
  if (k_max == 0) bad("retrieval.k_max must be positive");
  if (max_new_queries == 0) bad("mining.max_new_queries must be positive");
  if (rubric_options.max_per_passage == 0 || rubric_options.merge_batch_size == 0)
    bad("rubrics.max_per_passage and rubrics.merge_batch_size must be positive");
  if (verify_options.batch_cap == 0 || verify_options.batch_cap > kMaxRubricsPerBatch)
    bad("verify.batch_cap must be in 1.." + std::to_string(kMaxRubricsPerBatch));
  if (votes == 0) bad("trainkit.votes must be positive");
  if (!(sample_fraction > 0.0 && sample_fraction <= 1.0)) bad("trainkit.sample_fraction must be in (0, 1]");
  if (embedder.kind != "hash" && embedder.kind != "http") bad("embedder.kind must be hash or http");
  if (embedder.kind == "hash" && embedder.dimension == 0) bad("embedder.dimension must be positive");
}

RunConfig config_from_json(const Json& doc, const std::filesystem::path& base_dir) {
  if (!doc.is_object()) bad("config must be a JSON object");
  RunConfig c;
  Section top(doc, "");
  top.get("seed", c.seed);
  std::string work_dir = c.work_dir.string();
  top.get("work_dir", work_dir);
  c.work_dir = base_dir / work_dir;

  c.judge = read_judge(top.sub("judge"), "judge", base_dir, c.judge);
  const Json& teacher = top.sub("teacher");
  c.teacher = teacher.is_null() ? c.judge : read_judge(teacher, "teacher", base_dir, c.judge);
  top.path("mock_rules", c.mock_rules, base_dir);

  {
    Section s(top.sub("embedder"), "embedder");
    s.get("kind", c.embedder.kind);
    s.get("dimension", c.embedder.dimension);
    s.get("endpoint_url", c.embedder.endpoint.url);
    s.get("model_name", c.embedder.endpoint.model_name);
    s.get("api_key_env", c.embedder.endpoint.api_key_env);
    s.get("batch_size", c.embedder.batch_size);
    long long timeout_ms = c.embedder.endpoint.timeout.count();
    s.get("timeout_ms", timeout_ms);
    c.embedder.endpoint.timeout = std::chrono::milliseconds(timeout_ms);
    s.finish();
  }
  {
    Section s(top.sub("segmentation"), "segmentation");
    s.get("min_sentences", c.min_sentences);
    s.get("max_sentences", c.max_sentences);
    s.finish();
  }
  {
    Section s(top.sub("retrieval"), "retrieval");
    s.get("k_max", c.k_max);
    s.get("threshold", c.threshold);
    s.finish();
  }
  {
    Section s(top.sub("mining"), "mining");
    s.get("max_nodes", c.budget.max_nodes);
    s.get("max_depth", c.budget.max_depth);
    s.get("max_judge_calls", c.budget.max_judge_calls);
    long long seconds = c.budget.wall_clock_limit.count();
    s.get("wall_clock_limit_seconds", seconds);
    c.budget.wall_clock_limit = std::chrono::seconds(seconds);
    s.get("max_new_queries", c.max_new_queries);
    s.finish();
  }
  {
    Section s(top.sub("rubrics"), "rubrics");
    s.get("max_per_passage", c.rubric_options.max_per_passage);
    s.get("merge_batch_size", c.rubric_options.merge_batch_size);
    s.get("workers", c.rubric_options.workers);
    s.finish();
  }
  {
    Section s(top.sub("verify"), "verify");
    std::string mode = std::string(to_string(c.mode));
    std::string format = std::string(judge::to_string(c.format));
    s.get("mode", mode);
    s.get("format", format);
    if (auto m = judge_mode_from_string(mode)) c.mode = *m;
    else bad("verify.mode must be ternary or binary");
    if (auto f = judge::label_format_from_string(format)) c.format = *f;
    else bad("unknown verify.format " + format);
    s.get("batch_cap", c.verify_options.batch_cap);
    s.get("workers", c.verify_options.workers);
    s.get("coalesce_below", c.verify_options.segment.coalesce_below);
    s.get("split_above", c.verify_options.segment.split_above);
    s.finish();
  }
  {
    Section s(top.sub("trainkit"), "trainkit");
    s.get("votes", c.votes);
    s.get("sample_fraction", c.sample_fraction);
    s.get("max_list_length", c.augment_options.max_list_length);
    s.get("downsample_min_length", c.augment_options.downsample_min_length);
    s.get("downsample_rate", c.augment_options.downsample_rate);
    s.get("max_response_length", c.feed_options.max_response_length);
    s.get("overlong_buffer", c.feed_options.overlong_buffer);
    s.get("penalty_factor", c.feed_options.penalty_factor);
    s.finish();
  }
  {
    Section s(top.sub("inputs"), "inputs");
    s.path("corpus", c.corpus, base_dir);
    s.path("questions", c.questions, base_dir);
    s.path("answers", c.answers, base_dir);
    s.path("qrels", c.qrels, base_dir);
    s.path("rollouts", c.rollouts, base_dir);
    s.finish();
  }
  top.finish();
  c.validate();

  // The hash covers the document as written, with keys in sorted order, so
  // reformatting the file does not change it.
  c.canonical = doc;
  c.hash = sha256_hex(c.canonical.dump());
  return c;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) bad("cannot open config file " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  Json doc;
  try {
    doc = Json::parse(buffer.str());
  } catch (const Json::parse_error& e) {
    bad("config file " + path.string() + " is not valid JSON: " + e.what());
  }
  return config_from_json(doc, path.parent_path());
}

}  // namespace nugget::cli
