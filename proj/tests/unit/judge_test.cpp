#include <doctest.h>

#include <fstream>

#include "nugget/core/jsonl.hpp"
#include "nugget/judge/judge.hpp"
#include "nugget/judge/label_format.hpp"
#include "nugget/judge/mock_backend.hpp"
#include "nugget/judge/reasoning.hpp"
#include "nugget/judge/templates.hpp"
#include "support.hpp"

using namespace nugget;
using namespace nugget::judge;
using nugget::testing::code_of;
using nugget::testing::ScriptedBackend;
using nugget::testing::TempDir;
using nugget::testing::wrap;

namespace {

constexpr auto S = SupportLabel::support;
constexpr auto P = SupportLabel::partial_support;
constexpr auto N = SupportLabel::not_support;

ErrorCode parse_error(std::string_view payload, LabelFormat f, std::size_t n, JudgeMode mode = JudgeMode::ternary) {
  return code_of([&] { parse_labels(payload, f, n, mode); });
}

const Question kQuestion{"q1", "Who built it?", Workload::long_form};
const Passage kPassage = Passage::make("It was built by Ada in 1901.", CorpusSource{"d", 0});

std::vector<Rubric> rubrics(std::size_t n) {
  std::vector<Rubric> out;
  for (std::size_t i = 0; i < n; ++i)
    out.push_back(Rubric::make("r" + std::to_string(i), "fact " + std::to_string(i), WeightClass::vital));
  return out;
}

}  // namespace

TEST_CASE("split_reasoning") {
  auto a = split_reasoning("<reasoning>x</reasoning>\nTrue");
  CHECK(a.reasoning == "x");
  CHECK(a.payload == "True");
  CHECK(a.well_formed);

  auto b = split_reasoning("True");
  CHECK(b.reasoning.empty());
  CHECK(b.payload == "True");
  CHECK_FALSE(b.well_formed);

  auto c = split_reasoning("<reasoning>a</reasoning> support,not_support");
  CHECK(c.reasoning == "a");
  CHECK(c.payload == "support,not_support");

  auto d = split_reasoning("junk</reasoning> False");
  CHECK_FALSE(d.well_formed);
  CHECK(d.payload == "False");
}

TEST_CASE("parse_labels table examples") {
  CHECK(parse_labels(R"(["support", "not_support", "partial_support"])", LabelFormat::json, 3) ==
        std::vector{S, N, P});
  CHECK(parse_labels("1. support\n2. not_support", LabelFormat::numbered, 2) == std::vector{S, N});
  CHECK(parse_error("support|not_support", LabelFormat::pipe_separated, 3) == ErrorCode::CountMismatch);
  CHECK(parse_labels("['support']", LabelFormat::python_list, 1) == std::vector{S});
  CHECK(parse_labels("<labels>\n  <label> support </label><label>not_support</label>\n</labels>", LabelFormat::xml,
                     2) == std::vector{S, N});
  CHECK(parse_labels("support\tnot_support", LabelFormat::tsv, 2) == std::vector{S, N});
}

TEST_CASE("parse_labels is case-insensitive but exact on names") {
  CHECK(parse_labels("SUPPORT, Not_Support", LabelFormat::comma_separated, 2) == std::vector{S, N});
  CHECK(parse_error("supported", LabelFormat::csv, 1) == ErrorCode::UnknownToken);
  CHECK(parse_error("partial", LabelFormat::csv, 1) == ErrorCode::UnknownToken);
}

TEST_CASE("parse_labels strips a code fence") {
  CHECK(parse_labels("```json\n[\"support\"]\n```", LabelFormat::json, 1) == std::vector{S});
  CHECK(parse_labels("```\n- partial_support\n```", LabelFormat::yaml, 1) == std::vector{P});
}

TEST_CASE("parse_labels error order") {
  // layout problems win over bad tokens, bad tokens over counts, counts over mode
  CHECK(parse_error("[\"support\"", LabelFormat::json, 1) == ErrorCode::FormatViolation);
  CHECK(parse_error("[\"maybe\", \"support\"]", LabelFormat::json, 1) == ErrorCode::UnknownToken);
  CHECK(parse_error("[\"partial_support\", \"support\"]", LabelFormat::json, 1, JudgeMode::binary) ==
        ErrorCode::CountMismatch);
  CHECK(parse_error("[\"partial_support\"]", LabelFormat::json, 1, JudgeMode::binary) == ErrorCode::BinaryViolation);
  CHECK(parse_error("* support\nsupport", LabelFormat::markdown, 2) == ErrorCode::FormatViolation);
  CHECK(parse_error("1. support\n3. support", LabelFormat::numbered, 2) == ErrorCode::FormatViolation);
  CHECK(parse_error("<labels><label>support</label>", LabelFormat::xml, 1) == ErrorCode::FormatViolation);
  CHECK(parse_error("", LabelFormat::csv, 1) != ErrorCode::UnknownToken);
}

TEST_CASE("serialize_labels canonical forms") {
  CHECK(serialize_labels(std::vector{S}, LabelFormat::csv) == "support");
  CHECK(serialize_labels(std::vector{S, N}, LabelFormat::yaml) == "- support\n- not_support");
  CHECK(serialize_labels(std::vector{P}, LabelFormat::xml) == "<labels>\n<label>partial_support</label>\n</labels>");
  CHECK(serialize_labels(std::vector{S, N}, LabelFormat::numbered) == "1. support\n2. not_support");
  CHECK(serialize_labels(std::vector{S, N}, LabelFormat::pipe_separated) == "support|not_support");
}

TEST_CASE("format ids round trip") {
  for (auto f : kAllFormats) {
    CHECK(label_format_from_string(to_string(f)) == f);
    CHECK_FALSE(instruction_text(f).empty());
  }
  CHECK_FALSE(label_format_from_string("toml").has_value());
}

TEST_CASE("templates render strictly") {
  CHECK(render("a {x} b {y}", {{"x", "1"}, {"y", "2"}}) == "a 1 b 2");
  CHECK(code_of([] { render("a {x}", {}); }) == ErrorCode::ConfigError);
  CHECK(code_of([] { render("a {x}", {{"x", "1"}, {"z", "2"}}); }) == ErrorCode::ConfigError);
  for (auto id : kAllTemplates) {
    CHECK(template_from_string(to_string(id)) == id);
    CHECK_FALSE(template_text(id).empty());
  }
}

TEST_CASE("payload parsers") {
  CHECK(parse_line_list("[None]", 5, "queries").empty());
  CHECK(parse_line_list("q1\nq2", 5, "queries") == std::vector<std::string>{"q1", "q2"});
  CHECK(parse_line_list("a\nb\nc", 2, "queries").size() == 2);
  CHECK(parse_boolean("True"));
  CHECK_FALSE(parse_boolean("False"));
  CHECK(code_of([] { parse_boolean("maybe"); }) == ErrorCode::UnparseablePayload);

  const auto groups = parse_merge_groups("X happened. [1, 2]\nY. [3]", 3);
  REQUIRE(groups.size() == 2);
  CHECK(groups[0] == MergeGroup{"X happened.", {1, 2}});
  CHECK(groups[1] == MergeGroup{"Y.", {3}});
  CHECK(parse_merge_groups("[NO NEED]", 3).size() == 3);
  CHECK(code_of([] { parse_merge_groups("X [1]", 2); }) == ErrorCode::CoverageViolation);
  CHECK(code_of([] { parse_merge_groups("X [1, 1]\nY [2]", 2); }) == ErrorCode::CoverageViolation);
  CHECK(code_of([] { parse_merge_groups("X [1]\nY [3]", 2); }) == ErrorCode::CoverageViolation);

  CHECK(parse_weights("vital\nokay", 2) == std::vector{WeightClass::vital, WeightClass::okay});
  CHECK(parse_weights("VITAL\nokay", 2) == std::vector{WeightClass::vital, WeightClass::okay});
  CHECK(code_of([] { parse_weights("vital", 2); }) == ErrorCode::CountMismatch);
  CHECK(code_of([] { parse_weights("vital\nmeh", 2); }) == ErrorCode::UnknownToken);
}

TEST_CASE("judge retries with a corrective note") {
  auto backend = std::make_shared<ScriptedBackend>(std::vector<std::string>{wrap("maybe"), wrap("True")});
  Judge judge(backend, JudgeConfig{});
  CHECK(judge.check_temporal("in 2020", kPassage));
  REQUIRE(backend->seen.size() == 2);
  CHECK(backend->seen[0].attempt == 0);
  CHECK(backend->seen[1].attempt == 1);
  CHECK(backend->seen[1].prompt.rfind(backend->seen[0].prompt, 0) == 0);
  CHECK(backend->seen[1].prompt.find("UnparseablePayload") != std::string::npos);
  CHECK(judge.requests() == 1);
  CHECK(judge.backend_calls() == 2);
}

TEST_CASE("judge exhaustion codes") {
  SUBCASE("verification reports VerificationFailed") {
    auto backend = std::make_shared<ScriptedBackend>(
        std::vector<std::string>{wrap("partial_support"), wrap("partial_support"), wrap("partial_support")});
    Judge judge(backend, JudgeConfig{});
    const auto rs = rubrics(1);
    CHECK(code_of([&] {
            judge.verify_rubrics(kQuestion, Block{0, "text"}, rs, LabelFormat::csv, JudgeMode::binary);
          }) == ErrorCode::VerificationFailed);
    CHECK(backend->seen.size() == 3);
  }
  SUBCASE("other operations keep the parse error code") {
    auto backend = std::make_shared<ScriptedBackend>(std::vector<std::string>{wrap("vital"), wrap("vital")});
    JudgeConfig config;
    config.max_retries = 1;
    Judge judge(backend, config);
    const std::vector<std::string> nuggets{"a", "b"};
    CHECK(code_of([&] { judge.assign_weights(kQuestion, nuggets); }) == ErrorCode::CountMismatch);
  }
  SUBCASE("transport failure is not retried") {
    auto backend = std::make_shared<ScriptedBackend>(std::vector<std::string>{});
    Judge judge(backend, JudgeConfig{});
    CHECK(code_of([&] { judge.check_temporal("q", kPassage); }) == ErrorCode::JudgeUnavailable);
    CHECK(backend->seen.size() == 1);
  }
}

TEST_CASE("judge operations parse their payloads") {
  auto backend = std::make_shared<ScriptedBackend>(std::vector<std::string>{
      wrap("[None]"), wrap("a\nb\nc"), wrap("True"), wrap("X [1, 2]"), wrap("support,not_support,partial_support")});
  Judge judge(backend, JudgeConfig{});
  CHECK(judge.rewrite_queries(kQuestion, "q", kPassage, 3).empty());
  CHECK(judge.extract_nuggets(kQuestion, kPassage, 2) == std::vector<std::string>{"a", "b"});
  const std::vector<std::string> existing{"x"};
  CHECK(judge.is_duplicate_query("y", existing));
  const std::vector<std::string> nuggets{"a", "b"};
  const auto groups = judge.merge_nuggets(kQuestion, nuggets);
  REQUIRE(groups.size() == 1);
  CHECK(groups[0].source_indices == std::vector<std::size_t>{1, 2});
  const auto rs = rubrics(3);
  CHECK(judge.verify_rubrics(kQuestion, Block{0, "b"}, rs, LabelFormat::csv, JudgeMode::ternary) ==
        std::vector{S, N, P});
  CHECK(code_of([&] { judge.verify_rubrics(kQuestion, Block{0, "b"}, rubrics(11), LabelFormat::csv,
                                           JudgeMode::ternary); }) == ErrorCode::ConfigError);
  CHECK(code_of([&] { judge.is_duplicate_query("y", {}); }) == ErrorCode::ConfigError);
}

TEST_CASE("judge cache answers repeats and persists") {
  TempDir dir;
  JudgeConfig config;
  config.cache_dir = dir.path();
  {
    auto backend = std::make_shared<ScriptedBackend>(std::vector<std::string>{wrap("True")});
    Judge judge(backend, config);
    CHECK(judge.check_temporal("q", kPassage));
    CHECK(judge.check_temporal("q", kPassage));
    CHECK(judge.backend_calls() == 1);
    CHECK(judge.requests() == 2);
  }
  CHECK(std::filesystem::exists(dir / "judge_cache.jsonl"));
  auto empty = std::make_shared<ScriptedBackend>(std::vector<std::string>{});
  Judge warm(empty, config);
  CHECK(warm.check_temporal("q", kPassage));
  CHECK(empty->seen.empty());
}

TEST_CASE("cache keys separate model, prompt, temperature and sample") {
  const auto k = cache_key("m", "p", 0.0);
  CHECK(k == cache_key("m", "p", 0.0, 0));
  CHECK(k != cache_key("m2", "p", 0.0));
  CHECK(k != cache_key("m", "p2", 0.0));
  CHECK(k != cache_key("m", "p", 0.7));
  CHECK(k != cache_key("m", "p", 0.0, 1));
  CHECK(k.size() == 64);
}

TEST_CASE("voting samples are distinct requests") {
  auto backend = std::make_shared<ScriptedBackend>(std::vector<std::string>{wrap("support"), wrap("not_support")});
  Judge judge(backend, JudgeConfig{});
  const auto rs = rubrics(1);
  const Block block{0, "b"};
  CHECK(judge.verify_rubrics_detailed(kQuestion, block, rs, LabelFormat::csv, JudgeMode::ternary, 0).labels ==
        std::vector{S});
  CHECK(judge.verify_rubrics_detailed(kQuestion, block, rs, LabelFormat::csv, JudgeMode::ternary, 1).labels ==
        std::vector{N});
  CHECK(backend->seen.at(1).sample == 1);
}

TEST_CASE("judge config validation") {
  JudgeConfig c;
  c.max_retries = -1;
  CHECK(code_of([&] { c.validate(); }) == ErrorCode::ConfigError);
  c = {};
  c.max_in_flight = 0;
  CHECK(code_of([&] { c.validate(); }) == ErrorCode::ConfigError);
  c = {};
  c.request_timeout = std::chrono::milliseconds(0);
  CHECK(code_of([&] { c.validate(); }) == ErrorCode::ConfigError);
}

TEST_CASE("mock backend rules") {
  const auto spec = Json::parse(R"({
    "rules": [
      {"template": "temporal", "when": {"passage": "Ada"}, "payload": "False"},
      {"template": "verify_ternary", "item": "fact 1", "token": "support"},
      {"template": "dedup", "attempt": 0, "raw": "<reasoning>x</reasoning>\nperhaps"},
      {"template": "dedup", "payload": "True"}
    ],
    "default_verify_label": "partial_support"
  })");
  auto backend = MockChatBackend::from_json(spec);
  Judge judge(backend, JudgeConfig{});
  CHECK_FALSE(judge.check_temporal("q", kPassage));
  CHECK(judge.check_temporal("q", Passage::make("Nothing here.", CorpusSource{"d", 1})));
  const auto rs = rubrics(3);
  CHECK(judge.verify_rubrics(kQuestion, Block{0, "b"}, rs, LabelFormat::json, JudgeMode::ternary) ==
        std::vector{P, S, P});
  // the scripted first attempt is rejected, the retry matches the later rule
  const std::vector<std::string> existing{"old"};
  CHECK(judge.is_duplicate_query("new", existing));
  CHECK(backend->calls() == 5);
  CHECK(judge.rewrite_queries(kQuestion, "q", kPassage, 3).empty());
  CHECK(code_of([] { MockChatBackend::from_json(Json::parse(R"({"rules":[{"template":"nope"}]})")); }) ==
        ErrorCode::ConfigError);
}
