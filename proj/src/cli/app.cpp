#include "nugget/cli/app.hpp"

#include <spdlog/spdlog.h>

#include <CLI11.hpp>
#include <chrono>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <sstream>

#include "nugget/cli/config.hpp"
#include "nugget/core/error.hpp"
#include "nugget/core/hash.hpp"
#include "nugget/core/jsonl.hpp"
#include "nugget/core/log.hpp"
#include "nugget/judge/mock_backend.hpp"
#include "nugget/mining/miner.hpp"
#include "nugget/retrieval/calibration.hpp"
#include "nugget/retrieval/embedder.hpp"
#include "nugget/retrieval/index.hpp"
#include "nugget/retrieval/segment.hpp"
#include "nugget/rubrics/builder.hpp"
#include "nugget/trainkit/augment.hpp"
#include "nugget/trainkit/gold.hpp"
#include "nugget/trainkit/metrics.hpp"
#include "nugget/trainkit/reward.hpp"
#include "nugget/verify/verify.hpp"

namespace nugget::cli {

namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

struct Context {
  RunConfig config;
  bool mock = false;
  bool resume = false;
  std::uint64_t seed = 0;

  std::shared_ptr<judge::Judge> judge_;
  std::shared_ptr<judge::Judge> teacher_;
  std::shared_ptr<retrieval::Embedder> embedder_;

  fs::path work(const char* name) const { return config.work_dir / name; }

  std::shared_ptr<judge::Judge> make_judge(judge::JudgeConfig cfg) const {
    if (!cfg.cache_dir) cfg.cache_dir = config.work_dir / "cache";
    if (mock) {
      auto backend = config.mock_rules ? judge::MockChatBackend::from_file(*config.mock_rules)
                                       : std::make_shared<judge::MockChatBackend>();
      return std::make_shared<judge::Judge>(backend, cfg);
    }
    if (cfg.endpoint_url.empty()) throw Error(ErrorCode::ConfigError, "judge endpoint_url is required without --mock");
    return judge::make_http_judge(cfg);
  }

  judge::Judge& judge() {
    if (!judge_) judge_ = make_judge(config.judge);
    return *judge_;
  }

  judge::Judge& teacher() {
    if (!teacher_) teacher_ = make_judge(config.teacher);
    return *teacher_;
  }

  std::shared_ptr<retrieval::Embedder> embedder() {
    if (embedder_) return embedder_;
    if (mock || config.embedder.kind == "hash") {
      embedder_ = std::make_shared<retrieval::HashEmbedder>(config.embedder.dimension);
    } else {
      if (config.embedder.endpoint.url.empty())
        throw Error(ErrorCode::ConfigError, "embedder endpoint_url is required for the http embedder");
      embedder_ = std::make_shared<retrieval::HttpEmbedder>(config.embedder.endpoint, config.embedder.batch_size);
    }
    return embedder_;
  }
};

std::string file_digest(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return {};
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return sha256_hex(buffer.str());
}

std::size_t count_records(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::size_t n = 0;
  for (std::string line; std::getline(in, line);)
    if (line.find_first_not_of(" \t\r") != std::string::npos) ++n;
  return n;
}

void require_inputs(const std::vector<fs::path>& inputs) {
  for (const auto& p : inputs)
    if (!fs::is_regular_file(p)) throw Error(ErrorCode::ConfigError, "missing input file: " + p.string());
}

// Runs `fn`, prefixing any error with the record it was working on.
template <typename F>
auto for_record(const std::string& record, F&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const Error& e) {
    throw Error(e.code(), record + ": " + e.detail());
  }
}

// Bookkeeping for one stage: checks inputs, decides whether a resumed run can
// skip the stage, and writes the run manifest next to the first output.
class StageRun {
 public:
  StageRun(Context& ctx, std::string stage, std::vector<fs::path> inputs, std::vector<fs::path> outputs,
           Json parameters = Json::object())
      : ctx_(ctx),
        stage_(std::move(stage)),
        inputs_(std::move(inputs)),
        outputs_(std::move(outputs)),
        parameters_(std::move(parameters)),
        start_(Clock::now()) {
    require_inputs(inputs_);
  }

  fs::path manifest_path() const { return fs::path(outputs_.front().string() + ".manifest.json"); }

  // True when --resume is set and the previous manifest matches the inputs,
  // configuration and the outputs still on disk.
  bool up_to_date() const {
    if (!ctx_.resume) return false;
    std::ifstream in(manifest_path(), std::ios::binary);
    if (!in) return false;
    Json previous;
    try {
      previous = Json::parse(in);
    } catch (const Json::parse_error&) {
      return false;
    }
    Json now = identity();
    for (const char* key : {"stage", "config_hash", "seed", "mock", "parameters", "inputs"})
      if (previous.value(key, Json()) != now[key]) return false;
    const Json outputs = previous.value("outputs", Json::array());
    if (outputs.size() != outputs_.size()) return false;
    for (std::size_t i = 0; i < outputs_.size(); ++i)
      if (outputs[i].value("sha256", "") != file_digest(outputs_[i])) return false;
    spdlog::info("{}: outputs are up to date, skipping", stage_);
    return true;
  }

  void finish(Json counts = Json::object()) {
    Json manifest = identity();
    manifest["schema_version"] = jsonl::kSchemaVersion;
    Json outputs = Json::array();
    for (const auto& p : outputs_)
      outputs.push_back({{"path", p.string()}, {"sha256", file_digest(p)}, {"records", count_records(p)}});
    manifest["outputs"] = outputs;
    manifest["counts"] = std::move(counts);
    manifest["wall_time_seconds"] = std::chrono::duration<double>(Clock::now() - start_).count();
    std::ofstream out(manifest_path(), std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::IoError, "cannot write " + manifest_path().string());
    out << manifest.dump(2) << '\n';
    spdlog::info("{}: done in {:.2f}s", stage_, manifest["wall_time_seconds"].get<double>());
  }

 private:
  Json identity() const {
    Json inputs = Json::array();
    for (const auto& p : inputs_) inputs.push_back({{"path", p.string()}, {"sha256", file_digest(p)}});
    return Json{{"stage", stage_},       {"config_hash", ctx_.config.hash}, {"seed", ctx_.seed},
                {"mock", ctx_.mock},     {"parameters", parameters_},       {"inputs", inputs}};
  }

  Context& ctx_;
  std::string stage_;
  std::vector<fs::path> inputs_;
  std::vector<fs::path> outputs_;
  Json parameters_;
  Clock::time_point start_;
};

struct QuestionRecord {
  Question question;
  std::optional<std::string> ground_truth;
};

std::vector<QuestionRecord> read_questions(const fs::path& path) {
  std::vector<QuestionRecord> out;
  std::set<std::string> seen;
  for (const auto& j : jsonl::read(path, false)) {
    QuestionRecord q{j.get<Question>(), std::nullopt};
    if (j.contains("ground_truth") && !j.at("ground_truth").is_null())
      q.ground_truth = j.at("ground_truth").get<std::string>();
    if (!seen.insert(q.question.id).second)
      throw Error(ErrorCode::SchemaViolation, path.string() + ": duplicate question id " + q.question.id);
    out.push_back(std::move(q));
  }
  return out;
}

const QuestionRecord& find_question(const std::vector<QuestionRecord>& questions, const std::string& id) {
  for (const auto& q : questions)
    if (q.question.id == id) return q;
  throw Error(ErrorCode::SchemaViolation, "unknown question id " + id);
}

std::map<std::string, RubricSet> read_rubric_sets(const fs::path& path) {
  std::map<std::string, RubricSet> out;
  for (const auto& j : jsonl::read(path)) {
    auto set = j.get<RubricSet>();
    set.validate();
    out[set.question_id] = std::move(set);
  }
  return out;
}

const RubricSet& find_rubrics(const std::map<std::string, RubricSet>& sets, const std::string& question_id) {
  auto it = sets.find(question_id);
  if (it == sets.end()) throw Error(ErrorCode::SchemaViolation, "no rubric set for question " + question_id);
  return it->second;
}

Json reward_record(const Answer& answer, const RewardScore& score) {
  Json j = Json(score);
  j["question_id"] = answer.question_id;
  j["generator"] = answer.generator;
  return j;
}

fs::path or_default(const std::string& given, const fs::path& fallback) {
  return given.empty() ? fallback : fs::path(given);
}

fs::path required(const std::string& given, const std::optional<fs::path>& configured, const char* what) {
  if (!given.empty()) return given;
  if (configured) return *configured;
  throw Error(ErrorCode::ConfigError, std::string("no ") + what + " given (flag or inputs section of the config)");
}

// ---------------------------------------------------------------- stages

struct SegmentArgs {
  std::string corpus, out;
  std::optional<std::size_t> min_sentences, max_sentences;
};

void cmd_segment(Context& ctx, const SegmentArgs& a) {
  const auto corpus = required(a.corpus, ctx.config.corpus, "corpus");
  const auto out = or_default(a.out, ctx.work("passages.jsonl"));
  const std::size_t lo = a.min_sentences.value_or(ctx.config.min_sentences);
  const std::size_t hi = a.max_sentences.value_or(ctx.config.max_sentences);
  StageRun stage(ctx, "segment", {corpus}, {out}, {{"min_sentences", lo}, {"max_sentences", hi}});
  if (stage.up_to_date()) return;

  std::vector<Json> records;
  std::size_t documents = 0;
  for (const auto& j : jsonl::read(corpus, false)) {
    const auto doc = j.get<retrieval::CorpusDocument>();
    for_record("document " + doc.doc_id, [&] {
      for (auto& p : retrieval::segment_document(doc, lo, hi)) records.push_back(Json(p));
    });
    ++documents;
  }
  jsonl::write(out, records);
  stage.finish({{"documents", documents}, {"passages", records.size()}});
}

struct IndexArgs {
  std::string passages, out, qrels, calibration_out;
  std::optional<double> threshold;
};

void cmd_index(Context& ctx, const IndexArgs& a) {
  const auto passages = or_default(a.passages, ctx.work("passages.jsonl"));
  const auto out = or_default(a.out, ctx.work("index.jsonl"));
  const auto calibration_out = or_default(a.calibration_out, ctx.work("calibration.jsonl"));
  std::optional<fs::path> qrels;
  if (!a.qrels.empty()) qrels = a.qrels;
  else if (ctx.config.qrels) qrels = ctx.config.qrels;
  const auto threshold = a.threshold ? a.threshold : ctx.config.threshold;
  if (!qrels && !threshold)
    throw Error(ErrorCode::ConfigError, "calibration needs qrels or a fixed retrieval.threshold");

  std::vector<fs::path> inputs{passages};
  if (qrels) inputs.push_back(*qrels);
  StageRun stage(ctx, "index", inputs, {out, calibration_out},
                 {{"embedder", ctx.embedder()->name()}, {"threshold", threshold ? Json(*threshold) : Json()}});
  if (stage.up_to_date()) return;

  retrieval::VectorIndex index(ctx.embedder());
  index.add(jsonl::from_records<Passage>(jsonl::read(passages)));
  index.save(out);

  retrieval::ThresholdCalibration calibration;
  if (qrels) {
    const auto records = jsonl::from_records<retrieval::QrelRecord>(jsonl::read(*qrels, false));
    calibration = retrieval::calibrate_threshold(records, index);
  } else {
    calibration.threshold = *threshold;
  }
  jsonl::write(calibration_out, {Json(calibration)});
  stage.finish({{"passages", index.size()}, {"threshold", calibration.threshold}});
}

retrieval::ThresholdCalibration read_calibration(const fs::path& path) {
  const auto records = jsonl::read(path);
  if (records.size() != 1) throw Error(ErrorCode::SchemaViolation, path.string() + ": expected one calibration record");
  return records.front().get<retrieval::ThresholdCalibration>();
}

struct MineArgs {
  std::string questions, index, calibration, out;
  std::optional<std::size_t> max_nodes, max_depth, max_judge_calls, k_max;
  std::optional<long long> wall_clock;
};

void cmd_mine(Context& ctx, const MineArgs& a) {
  const auto questions_path = required(a.questions, ctx.config.questions, "questions file");
  const auto index_path = or_default(a.index, ctx.work("index.jsonl"));
  const auto calibration_path = or_default(a.calibration, ctx.work("calibration.jsonl"));
  const auto out = or_default(a.out, ctx.work("mining.jsonl"));
  auto budget = ctx.config.budget;
  if (a.max_nodes) budget.max_nodes = *a.max_nodes;
  if (a.max_depth) budget.max_depth = *a.max_depth;
  if (a.max_judge_calls) budget.max_judge_calls = *a.max_judge_calls;
  if (a.wall_clock) budget.wall_clock_limit = std::chrono::seconds(*a.wall_clock);
  budget.validate();
  const std::size_t k_max = a.k_max.value_or(ctx.config.k_max);

  StageRun stage(ctx, "mine", {questions_path, index_path, calibration_path}, {out},
                 {{"budget", Json(budget)}, {"k_max", k_max}});
  if (stage.up_to_date()) return;

  const auto questions = read_questions(questions_path);
  const auto index = retrieval::VectorIndex::load(index_path, ctx.embedder());
  const auto calibration = read_calibration(calibration_path);

  std::vector<Json> records;
  std::size_t passages = 0, exhausted = 0;
  for (const auto& q : questions) {
    if (q.question.workload != Workload::long_form) continue;
    auto report = for_record("question " + q.question.id, [&] {
      return mining::mine_passages(q.question, *index, calibration, ctx.judge(), budget, ctx.config.max_new_queries,
                                   k_max);
    });
    passages += report.passages.size();
    exhausted += report.stats.budget_exhaustions;
    records.push_back(Json{{"question_id", q.question.id}, {"report", Json(report)}});
  }
  jsonl::write(out, records);
  stage.finish({{"questions", records.size()}, {"passages", passages}, {"budget_exhaustions", exhausted}});
}

struct RubricsArgs {
  std::string questions, mining, passage_list, out;
};

void cmd_rubrics(Context& ctx, const RubricsArgs& a) {
  const auto questions_path = required(a.questions, ctx.config.questions, "questions file");
  const fs::path source = a.passage_list.empty() ? or_default(a.mining, ctx.work("mining.jsonl")) : fs::path(a.passage_list);
  const auto out = or_default(a.out, ctx.work("rubrics.jsonl"));
  StageRun stage(ctx, "rubrics", {questions_path, source}, {out},
                 {{"source", a.passage_list.empty() ? "mining" : "passage_list"}});
  if (stage.up_to_date()) return;

  const auto questions = read_questions(questions_path);
  std::map<std::string, std::vector<Passage>> passages;
  if (a.passage_list.empty()) {
    for (const auto& j : jsonl::read(source)) {
      auto report = mining::report_from_json(j.at("report"));
      passages[j.at("question_id").get<std::string>()] = std::move(report.passages);
    }
  } else {
    for (const auto& j : jsonl::read(source, false))
      passages[j.at("question_id").get<std::string>()].push_back(j.at("passage").get<Passage>());
  }

  std::vector<Json> records;
  std::size_t total = 0;
  for (const auto& q : questions) {
    auto set = for_record("question " + q.question.id, [&] {
      if (q.question.workload == Workload::short_form) {
        if (!q.ground_truth) throw Error(ErrorCode::EmptyGroundTruth, "short-form question without ground_truth");
        return rubrics::short_form_rubric(q.question.id, *q.ground_truth);
      }
      auto it = passages.find(q.question.id);
      if (it == passages.end()) spdlog::warn("question {} has no passages; its rubric set is empty", q.question.id);
      std::span<const Passage> list = it == passages.end() ? std::span<const Passage>() : std::span(it->second);
      return rubrics::build_rubric_set(q.question, list, ctx.judge(), ctx.config.rubric_options);
    });
    total += set.rubrics.size();
    records.push_back(Json(set));
  }
  jsonl::write(out, records);
  stage.finish({{"questions", records.size()}, {"rubrics", total}});
}

struct VerifyArgs {
  std::string questions, answers, rubrics, judgments_out, rewards_out, mode, format;
  std::optional<std::size_t> batch_cap;
};

void cmd_verify(Context& ctx, const VerifyArgs& a) {
  const auto questions_path = required(a.questions, ctx.config.questions, "questions file");
  const auto answers_path = required(a.answers, ctx.config.answers, "answers file");
  const auto rubrics_path = or_default(a.rubrics, ctx.work("rubrics.jsonl"));
  const auto judgments_out = or_default(a.judgments_out, ctx.work("judgments.jsonl"));
  const auto rewards_out = or_default(a.rewards_out, ctx.work("rewards.jsonl"));

  JudgeMode mode = ctx.config.mode;
  if (!a.mode.empty()) {
    auto m = judge_mode_from_string(a.mode);
    if (!m) throw Error(ErrorCode::ConfigError, "--mode must be ternary or binary");
    mode = *m;
  }
  judge::LabelFormat format = ctx.config.format;
  if (!a.format.empty()) {
    auto f = judge::label_format_from_string(a.format);
    if (!f) throw Error(ErrorCode::ConfigError, "unknown label format " + a.format);
    format = *f;
  }
  auto options = ctx.config.verify_options;
  if (a.batch_cap) options.batch_cap = *a.batch_cap;
  if (options.batch_cap == 0 || options.batch_cap > kMaxRubricsPerBatch)
    throw Error(ErrorCode::ConfigError, "--batch-cap must be in 1.." + std::to_string(kMaxRubricsPerBatch));

  StageRun stage(ctx, "verify", {questions_path, answers_path, rubrics_path}, {judgments_out, rewards_out},
                 {{"mode", to_string(mode)}, {"format", judge::to_string(format)}, {"batch_cap", options.batch_cap}});
  if (stage.up_to_date()) return;

  const auto questions = read_questions(questions_path);
  const auto sets = read_rubric_sets(rubrics_path);
  std::vector<Json> judgments, rewards;
  for (const auto& j : jsonl::read(answers_path, false)) {
    const auto answer = j.get<Answer>();
    for_record("answer " + answer.question_id + "/" + answer.generator, [&] {
      const auto& q = find_question(questions, answer.question_id);
      const auto& set = find_rubrics(sets, answer.question_id);
      auto labels = verify::verify_answer(q.question, answer, set, ctx.judge(), format, mode, options);
      for (const auto& jd : labels) {
        Json record = Json(jd);
        record["question_id"] = answer.question_id;
        record["generator"] = answer.generator;
        judgments.push_back(std::move(record));
      }
      rewards.push_back(reward_record(answer, verify::reward(set, verify::aggregate(labels, set))));
    });
  }
  jsonl::write(judgments_out, judgments);
  jsonl::write(rewards_out, rewards);
  stage.finish({{"answers", rewards.size()},
                {"judgments", judgments.size()},
                {"judge_requests", ctx.judge().requests()},
                {"judge_backend_calls", ctx.judge().backend_calls()}});
}

struct RewardArgs {
  std::string judgments, rubrics, rollouts, out;
};

void cmd_reward(Context& ctx, const RewardArgs& a) {
  const bool feed = !a.rollouts.empty() || (a.judgments.empty() && ctx.config.rollouts);
  if (feed) {
    const auto rollouts_path = required(a.rollouts, ctx.config.rollouts, "rollouts file");
    const auto out = or_default(a.out, ctx.work("reward_feed.jsonl"));
    const auto& fo = ctx.config.feed_options;
    StageRun stage(ctx, "reward", {rollouts_path}, {out},
                   {{"max_response_length", fo.max_response_length},
                    {"overlong_buffer", fo.overlong_buffer},
                    {"penalty_factor", fo.penalty_factor}});
    if (stage.up_to_date()) return;
    const auto rollouts = jsonl::from_records<trainkit::Rollout>(jsonl::read(rollouts_path, false));
    const auto entries = trainkit::build_reward_feed(rollouts, fo);
    std::size_t kept = 0;
    for (const auto& e : entries) kept += e.keep ? 1 : 0;
    jsonl::write(out, jsonl::to_records(entries));
    stage.finish({{"rollouts", entries.size()}, {"kept", kept}});
    return;
  }

  const auto judgments_path = or_default(a.judgments, ctx.work("judgments.jsonl"));
  const auto rubrics_path = or_default(a.rubrics, ctx.work("rubrics.jsonl"));
  const auto out = or_default(a.out, ctx.work("rewards.jsonl"));
  StageRun stage(ctx, "reward", {judgments_path, rubrics_path}, {out});
  if (stage.up_to_date()) return;

  const auto sets = read_rubric_sets(rubrics_path);
  std::vector<std::pair<Answer, std::vector<Judgment>>> groups;
  for (const auto& j : jsonl::read(judgments_path)) {
    Answer key{j.at("question_id").get<std::string>(), "", j.value("generator", std::string{})};
    auto it = std::find_if(groups.begin(), groups.end(), [&](const auto& g) {
      return g.first.question_id == key.question_id && g.first.generator == key.generator;
    });
    if (it == groups.end()) it = groups.insert(groups.end(), {key, {}});
    it->second.push_back(j.get<Judgment>());
  }
  std::vector<Json> rewards;
  for (const auto& [answer, labels] : groups) {
    for_record("answer " + answer.question_id + "/" + answer.generator, [&] {
      const auto& set = find_rubrics(sets, answer.question_id);
      rewards.push_back(reward_record(answer, verify::reward(set, verify::aggregate(labels, set))));
    });
  }
  jsonl::write(out, rewards);
  stage.finish({{"answers", rewards.size()}});
}

struct EvalArgs {
  std::string predictions, out, format;
};

struct Prediction {
  Question question;
  std::string prediction;
  std::string ground_truth;
};

std::vector<Prediction> read_predictions(const fs::path& path) {
  std::vector<Prediction> out;
  for (const auto& j : jsonl::read(path, false)) {
    try {
      Prediction p;
      p.question.id = j.at("question_id").get<std::string>();
      p.question.text = j.value("question", std::string{});
      p.question.workload = Workload::short_form;
      p.prediction = j.at("prediction").get<std::string>();
      p.ground_truth = j.at("ground_truth").get<std::string>();
      out.push_back(std::move(p));
    } catch (const Json::exception& e) {
      throw Error(ErrorCode::SchemaViolation, path.string() + ": " + e.what());
    }
  }
  return out;
}

void cmd_em_eval(Context& ctx, const EvalArgs& a) {
  const auto predictions_path = fs::path(a.predictions);
  const auto out = or_default(a.out, ctx.work("em_eval.jsonl"));
  StageRun stage(ctx, "em-eval", {predictions_path}, {out});
  if (stage.up_to_date()) return;
  std::vector<Json> records;
  std::size_t correct = 0;
  for (const auto& p : read_predictions(predictions_path)) {
    const bool ok = verify::em_match(p.prediction, p.ground_truth);
    correct += ok ? 1 : 0;
    records.push_back({{"question_id", p.question.id}, {"correct", ok}});
  }
  jsonl::write(out, records);
  const double accuracy = records.empty() ? 0.0 : static_cast<double>(correct) / static_cast<double>(records.size());
  std::cout << Json{{"count", records.size()}, {"accuracy", accuracy}}.dump() << '\n';
  stage.finish({{"count", records.size()}, {"correct", correct}});
}

void cmd_hybrid_eval(Context& ctx, const EvalArgs& a) {
  const auto predictions_path = fs::path(a.predictions);
  const auto out = or_default(a.out, ctx.work("hybrid_eval.jsonl"));
  judge::LabelFormat format = ctx.config.format;
  if (!a.format.empty()) {
    auto f = judge::label_format_from_string(a.format);
    if (!f) throw Error(ErrorCode::ConfigError, "unknown label format " + a.format);
    format = *f;
  }
  StageRun stage(ctx, "hybrid-eval", {predictions_path}, {out}, {{"format", judge::to_string(format)}});
  if (stage.up_to_date()) return;
  std::vector<Json> records;
  std::size_t em_correct = 0, correct = 0;
  for (const auto& p : read_predictions(predictions_path)) {
    for_record("question " + p.question.id, [&] {
      const bool em = verify::em_match(p.prediction, p.ground_truth);
      const auto verdict = verify::hybrid_verify(p.question, p.prediction, p.ground_truth, ctx.judge(), format);
      em_correct += em ? 1 : 0;
      correct += verdict.correct ? 1 : 0;
      records.push_back(
          {{"question_id", p.question.id}, {"em", em}, {"correct", verdict.correct}, {"judged", verdict.judged}});
    });
  }
  jsonl::write(out, records);
  std::cout << Json{{"count", records.size()}, {"em_correct", em_correct}, {"correct", correct}}.dump() << '\n';
  stage.finish({{"count", records.size()}, {"em_correct", em_correct}, {"correct", correct}});
}

struct GoldArgs {
  std::string questions, answers, rubrics, out, format;
  std::optional<std::size_t> votes;
};

void cmd_gold_label(Context& ctx, const GoldArgs& a) {
  const auto questions_path = required(a.questions, ctx.config.questions, "questions file");
  const auto answers_path = required(a.answers, ctx.config.answers, "answers file");
  const auto rubrics_path = or_default(a.rubrics, ctx.work("rubrics.jsonl"));
  const auto out = or_default(a.out, ctx.work("gold.jsonl"));
  judge::LabelFormat format = ctx.config.format;
  if (!a.format.empty()) {
    auto f = judge::label_format_from_string(a.format);
    if (!f) throw Error(ErrorCode::ConfigError, "unknown label format " + a.format);
    format = *f;
  }
  trainkit::GoldOptions options;
  options.votes = a.votes.value_or(ctx.config.votes);
  options.batch_cap = ctx.config.verify_options.batch_cap;
  options.workers = ctx.config.verify_options.workers;
  options.mode = ctx.config.mode;
  if (options.votes == 0) throw Error(ErrorCode::ConfigError, "--votes must be positive");

  StageRun stage(ctx, "gold-label", {questions_path, answers_path, rubrics_path}, {out},
                 {{"votes", options.votes}, {"format", judge::to_string(format)}, {"mode", to_string(options.mode)}});
  if (stage.up_to_date()) return;

  const auto questions = read_questions(questions_path);
  const auto sets = read_rubric_sets(rubrics_path);
  std::vector<Json> records;
  for (const auto& j : jsonl::read(answers_path, false)) {
    const auto answer = j.get<Answer>();
    for_record("answer " + answer.question_id + "/" + answer.generator, [&] {
      const auto& q = find_question(questions, answer.question_id);
      const auto blocks = verify::segment_answer(answer, q.question.workload, ctx.config.verify_options.segment);
      for (auto& g : trainkit::generate_gold(q.question, blocks, find_rubrics(sets, answer.question_id),
                                             ctx.teacher(), format, options))
        records.push_back(Json(g));
    });
  }
  jsonl::write(out, records);
  stage.finish({{"records", records.size()}});
}

struct AugmentArgs {
  std::string gold, out;
  std::optional<double> sample_fraction;
};

void cmd_augment(Context& ctx, const AugmentArgs& a) {
  const auto gold = or_default(a.gold, ctx.work("gold.jsonl"));
  const auto out = or_default(a.out, ctx.work("augmented.jsonl"));
  const double fraction = a.sample_fraction.value_or(ctx.config.sample_fraction);
  StageRun stage(ctx, "augment", {gold}, {out}, {{"sample_fraction", fraction}});
  if (stage.up_to_date()) return;
  const auto records = jsonl::from_records<GoldRecord>(jsonl::read(gold));
  const auto augmented = trainkit::augment(records, ctx.seed, fraction, ctx.config.augment_options);
  jsonl::write(out, jsonl::to_records(augmented));
  stage.finish({{"gold_records", records.size()}, {"augmented", augmented.size()}});
}

struct MetricsArgs {
  std::string labeled, out;
};

void cmd_metrics(Context& ctx, const MetricsArgs& a) {
  const auto labeled = fs::path(a.labeled);
  const auto out = or_default(a.out, ctx.work("metrics.jsonl"));
  StageRun stage(ctx, "metrics", {labeled}, {out});
  if (stage.up_to_date()) return;
  const auto items = jsonl::from_records<trainkit::LabeledJudgment>(jsonl::read(labeled, false));
  const auto reports = trainkit::sample_level_metrics(items);
  jsonl::write(out, {Json(reports.rubric_level), Json(reports.sample_level)});
  std::cout << Json{{"rubric_level_macro_f1", reports.rubric_level.macro_f1},
                    {"sample_level_macro_f1", reports.sample_level.macro_f1}}
                   .dump()
            << '\n';
  stage.finish({{"judgments", items.size()}});
}

struct CorrelateArgs {
  std::string a, b, out;
};

void cmd_correlate(Context& ctx, const CorrelateArgs& args) {
  const fs::path pa = args.a, pb = args.b;
  const auto out = or_default(args.out, ctx.work("correlation.jsonl"));
  StageRun stage(ctx, "correlate", {pa, pb}, {out});
  if (stage.up_to_date()) return;
  auto keyed = [](const fs::path& path) {
    std::vector<std::pair<std::string, double>> out;
    for (const auto& j : jsonl::read(path, false))
      out.emplace_back(j.at("question_id").get<std::string>() + "\n" + j.value("generator", std::string{}),
                       j.at("value").get<double>());
    return out;
  };
  const auto xs = keyed(pa);
  std::map<std::string, double> ys;
  for (const auto& [k, v] : keyed(pb)) ys[k] = v;
  std::vector<double> x, y;
  for (const auto& [k, v] : xs) {
    auto it = ys.find(k);
    if (it == ys.end()) continue;
    x.push_back(v);
    y.push_back(it->second);
  }
  const double r = trainkit::pearson(x, y);
  jsonl::write(out, {Json{{"n", x.size()}, {"pearson", r}}});
  std::cout << Json{{"n", x.size()}, {"pearson", r}}.dump() << '\n';
  stage.finish({{"pairs", x.size()}});
}

const std::vector<std::string> kPipelineStages{"segment", "index",      "mine",    "rubrics",
                                               "verify",  "gold-label", "augment", "reward"};

void cmd_pipeline(Context& ctx, std::vector<std::string> stages) {
  if (stages.empty()) {
    stages = {"segment", "index", "mine", "rubrics", "verify"};
    if (ctx.config.rollouts) stages.push_back("reward");
  }
  for (const auto& s : stages)
    if (std::find(kPipelineStages.begin(), kPipelineStages.end(), s) == kPipelineStages.end())
      throw Error(ErrorCode::ConfigError, "unknown pipeline stage " + s);
  for (const auto& name : kPipelineStages) {
    if (std::find(stages.begin(), stages.end(), name) == stages.end()) continue;
    spdlog::info("pipeline: {}", name);
    if (name == "segment") cmd_segment(ctx, {});
    else if (name == "index") cmd_index(ctx, {});
    else if (name == "mine") cmd_mine(ctx, {});
    else if (name == "rubrics") cmd_rubrics(ctx, {});
    else if (name == "verify") cmd_verify(ctx, {});
    else if (name == "gold-label") cmd_gold_label(ctx, {});
    else if (name == "augment") cmd_augment(ctx, {});
    else if (name == "reward") cmd_reward(ctx, {});
  }
}

}  // namespace

int run(const std::vector<std::string>& args) {
  CLI::App app{"Nugget-based rubric rewards: mining, rubric building, verification and training utilities",
               "nuggetctl"};
  app.require_subcommand(1);

  std::string config_path, log_level = "info";
  std::optional<std::uint64_t> seed;
  bool mock = false, resume = false;
  app.add_option("--config", config_path, "JSON run configuration");
  app.add_flag("--mock", mock, "use the scripted judge and the offline embedder");
  app.add_option("--seed", seed, "root seed (overrides the config)");
  app.add_flag("--resume", resume, "skip stages whose manifest matches their inputs");
  app.add_option("--log-level", log_level, "trace, debug, info, warn, error, critical or off");

  std::function<void(Context&)> action;
  auto sub = [&](const char* name, const char* help) {
    auto* s = app.add_subcommand(name, help);
    s->fallthrough();
    return s;
  };

  SegmentArgs segment;
  auto* s = sub("segment", "split corpus documents into sentence-window passages");
  s->add_option("--corpus", segment.corpus, "JSONL {doc_id, text}");
  s->add_option("--out", segment.out);
  s->add_option("--min-sentences", segment.min_sentences);
  s->add_option("--max-sentences", segment.max_sentences);
  s->callback([&] { action = [&](Context& c) { cmd_segment(c, segment); }; });

  IndexArgs index;
  s = sub("index", "embed passages and calibrate the relevance threshold");
  s->add_option("--passages", index.passages);
  s->add_option("--out", index.out);
  s->add_option("--qrels", index.qrels, "JSONL {query_text, passage_id, relevant}");
  s->add_option("--threshold", index.threshold, "fixed threshold when no qrels are given");
  s->add_option("--calibration-out", index.calibration_out);
  s->callback([&] { action = [&](Context& c) { cmd_index(c, index); }; });

  MineArgs mine;
  s = sub("mine", "grow the query/passage tree for every long-form question");
  s->add_option("--question-file,--questions", mine.questions);
  s->add_option("--index", mine.index);
  s->add_option("--calibration", mine.calibration);
  s->add_option("--out", mine.out);
  s->add_option("--max-nodes", mine.max_nodes);
  s->add_option("--max-depth", mine.max_depth);
  s->add_option("--max-judge-calls", mine.max_judge_calls);
  s->add_option("--wall-clock-seconds", mine.wall_clock);
  s->add_option("--k-max", mine.k_max);
  s->callback([&] { action = [&](Context& c) { cmd_mine(c, mine); }; });

  RubricsArgs rubric_args;
  s = sub("rubrics", "extract, merge and weight nuggets into rubric sets");
  s->add_option("--questions", rubric_args.questions);
  s->add_option("--mining", rubric_args.mining, "mining reports from the mine command");
  s->add_option("--passage-list", rubric_args.passage_list, "JSONL {question_id, passage}");
  s->add_option("--out", rubric_args.out);
  s->callback([&] { action = [&](Context& c) { cmd_rubrics(c, rubric_args); }; });

  VerifyArgs verify_args;
  s = sub("verify", "judge answers against rubric sets and score them");
  s->add_option("--questions", verify_args.questions);
  s->add_option("--answers", verify_args.answers, "JSONL {question_id, text, generator}");
  s->add_option("--rubrics", verify_args.rubrics);
  s->add_option("--judgments-out", verify_args.judgments_out);
  s->add_option("--rewards-out", verify_args.rewards_out);
  s->add_option("--mode", verify_args.mode, "ternary or binary");
  s->add_option("--format", verify_args.format, "label format id");
  s->add_option("--batch-cap", verify_args.batch_cap);
  s->callback([&] { action = [&](Context& c) { cmd_verify(c, verify_args); }; });

  RewardArgs reward_args;
  s = sub("reward", "rewards from stored judgments, or a training feed from rollouts");
  s->add_option("--judgments", reward_args.judgments);
  s->add_option("--rubrics", reward_args.rubrics);
  s->add_option("--rollouts", reward_args.rollouts);
  s->add_option("--out", reward_args.out);
  s->callback([&] { action = [&](Context& c) { cmd_reward(c, reward_args); }; });

  EvalArgs em_args;
  s = sub("em-eval", "exact-match accuracy of short answers");
  s->add_option("--predictions", em_args.predictions, "JSONL {question_id, prediction, ground_truth}")->required();
  s->add_option("--out", em_args.out);
  s->callback([&] { action = [&](Context& c) { cmd_em_eval(c, em_args); }; });

  EvalArgs hybrid_args;
  s = sub("hybrid-eval", "exact match with a judge fallback for misses");
  s->add_option("--predictions", hybrid_args.predictions)->required();
  s->add_option("--out", hybrid_args.out);
  s->add_option("--format", hybrid_args.format);
  s->callback([&] { action = [&](Context& c) { cmd_hybrid_eval(c, hybrid_args); }; });

  GoldArgs gold_args;
  s = sub("gold-label", "teacher labels for every answer block and rubric");
  s->add_option("--questions", gold_args.questions);
  s->add_option("--answers", gold_args.answers);
  s->add_option("--rubrics", gold_args.rubrics);
  s->add_option("--out", gold_args.out);
  s->add_option("--format", gold_args.format);
  s->add_option("--votes", gold_args.votes);
  s->callback([&] { action = [&](Context& c) { cmd_gold_label(c, gold_args); }; });

  AugmentArgs augment_args;
  s = sub("augment", "rebalance gold data over every label composition");
  s->add_option("--gold", augment_args.gold);
  s->add_option("--out", augment_args.out);
  s->add_option("--sample-fraction", augment_args.sample_fraction);
  s->callback([&] { action = [&](Context& c) { cmd_augment(c, augment_args); }; });

  MetricsArgs metrics_args;
  s = sub("metrics", "rubric- and sample-level macro precision, recall and F1");
  s->add_option("--labeled", metrics_args.labeled, "JSONL of predicted/gold label pairs")->required();
  s->add_option("--out", metrics_args.out);
  s->callback([&] { action = [&](Context& c) { cmd_metrics(c, metrics_args); }; });

  CorrelateArgs correlate_args;
  s = sub("correlate", "Pearson correlation between two reward files");
  s->add_option("--a", correlate_args.a)->required();
  s->add_option("--b", correlate_args.b)->required();
  s->add_option("--out", correlate_args.out);
  s->callback([&] { action = [&](Context& c) { cmd_correlate(c, correlate_args); }; });

  std::vector<std::string> stages;
  s = sub("pipeline", "run stages in order, each reading its predecessor's output");
  s->add_option("--stages", stages, "subset of segment,index,mine,rubrics,verify,gold-label,augment,reward")
      ->delimiter(',');
  s->callback([&] { action = [&](Context& c) { cmd_pipeline(c, stages); }; });

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfigError;
  }

  if (!set_log_level(log_level)) {
    std::cerr << "unknown log level " << log_level << '\n';
    return kExitConfigError;
  }

  try {
    Context ctx;
    ctx.config = config_path.empty() ? config_from_json(Json::object(), fs::current_path()) : load_config(config_path);
    ctx.mock = mock;
    ctx.resume = resume;
    ctx.seed = seed.value_or(ctx.config.seed);
    action(ctx);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return e.code() == ErrorCode::ConfigError ? kExitConfigError : kExitStageError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitStageError;
  }
  return 0;
}

}  // namespace nugget::cli
