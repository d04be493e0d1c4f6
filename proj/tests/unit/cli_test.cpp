#include <doctest.h>

#include <fstream>
#include <sstream>

#include "nugget/cli/app.hpp"
#include "nugget/cli/config.hpp"
#include "nugget/core/jsonl.hpp"
#include "support.hpp"

using namespace nugget;
using nugget::testing::code_of;
using nugget::testing::TempDir;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
}

// Copy of the toy fixture in a scratch directory.
struct ToyRun {
  TempDir dir;
  ToyRun() {
    for (const auto& entry : fs::directory_iterator(NUGGET_TOY_FIXTURE_DIR))
      if (entry.is_regular_file()) fs::copy_file(entry.path(), dir / entry.path().filename().string());
  }
  std::string config() const { return (dir / "config.json").string(); }
  fs::path work(const std::string& name) const { return dir / "run" / name; }
};

}  // namespace

TEST_CASE("config defaults and relative paths") {
  const auto c = cli::config_from_json(Json::parse(R"({"inputs": {"corpus": "data/c.jsonl"}, "seed": 3})"), "/base");
  CHECK(c.seed == 3);
  CHECK(c.corpus == fs::path("/base/data/c.jsonl"));
  CHECK(c.work_dir == fs::path("/base/run"));
  CHECK(c.teacher.model_name == c.judge.model_name);
  CHECK(c.hash.size() == 64);
  CHECK(c.hash != cli::config_from_json(Json::parse(R"({"seed": 4})"), "/base").hash);
}

TEST_CASE("config rejects unknown keys and bad values") {
  CHECK(code_of([] { cli::config_from_json(Json::parse(R"({"sed": 1})"), "/"); }) == ErrorCode::ConfigError);
  CHECK(code_of([] { cli::config_from_json(Json::parse(R"({"judge": {"retries": 1}})"), "/"); }) ==
        ErrorCode::ConfigError);
  CHECK(code_of([] { cli::config_from_json(Json::parse(R"({"verify": {"format": "toml"}})"), "/"); }) ==
        ErrorCode::ConfigError);
  CHECK(code_of([] { cli::config_from_json(Json::parse(R"({"segmentation": {"min_sentences": 0}})"), "/"); }) ==
        ErrorCode::ConfigError);
  CHECK(code_of([] { cli::config_from_json(Json::parse(R"({"seed": "x"})"), "/"); }) == ErrorCode::ConfigError);
  CHECK(code_of([] { cli::load_config("/definitely/not/here.json"); }) == ErrorCode::ConfigError);
  TempDir dir;
  write_text(dir / "bad.json", "{not json");
  CHECK(code_of([&] { cli::load_config(dir / "bad.json"); }) == ErrorCode::ConfigError);
}

TEST_CASE("exit codes") {
  ToyRun toy;
  CHECK(cli::run({"--config", (toy.dir / "nope.json").string(), "segment"}) == cli::kExitConfigError);
  CHECK(cli::run({"--config", toy.config(), "--mock", "--log-level", "off", "segment", "--corpus",
                  (toy.dir / "missing.jsonl").string()}) == cli::kExitConfigError);
  CHECK(cli::run({"--config", toy.config(), "no-such-command"}) == cli::kExitConfigError);
  CHECK(cli::run({"--config", toy.config(), "--log-level", "loud", "segment"}) == cli::kExitConfigError);
  write_text(toy.dir / "broken.jsonl", "{\"doc_id\": 1}\n");
  CHECK(cli::run({"--config", toy.config(), "--mock", "--log-level", "off", "segment", "--corpus",
                  (toy.dir / "broken.jsonl").string()}) == cli::kExitStageError);
}

TEST_CASE("mock pipeline writes manifests and resumes byte-identically") {
  ToyRun toy;
  REQUIRE(cli::run({"--config", toy.config(), "--mock", "--log-level", "off", "pipeline"}) == 0);
  for (const char* f : {"passages.jsonl", "index.jsonl", "mining.jsonl", "rubrics.jsonl", "judgments.jsonl",
                        "rewards.jsonl"})
    CHECK(fs::exists(toy.work(f)));
  const auto manifest = Json::parse(slurp(toy.work("judgments.jsonl.manifest.json")));
  CHECK(manifest["stage"] == "verify");
  CHECK(manifest["mock"] == true);
  CHECK(manifest["seed"] == 17);
  CHECK(manifest["outputs"].size() == 2);
  CHECK_FALSE(manifest["inputs"].empty());

  const auto rewards = slurp(toy.work("rewards.jsonl"));
  CHECK(rewards == slurp(fs::path(NUGGET_TOY_FIXTURE_DIR) / "golden" / "rewards.jsonl"));
  const auto stamp = fs::last_write_time(toy.work("rewards.jsonl"));
  REQUIRE(cli::run({"--config", toy.config(), "--mock", "--resume", "--log-level", "off", "pipeline"}) == 0);
  CHECK(slurp(toy.work("rewards.jsonl")) == rewards);
  CHECK(fs::last_write_time(toy.work("rewards.jsonl")) == stamp);

  // a tampered output is recomputed on resume
  write_text(toy.work("rewards.jsonl"), "tampered\n");
  REQUIRE(cli::run({"--config", toy.config(), "--mock", "--resume", "--log-level", "off", "pipeline"}) == 0);
  CHECK(slurp(toy.work("rewards.jsonl")) == rewards);

  // a warm cache without --resume reproduces the same bytes
  REQUIRE(cli::run({"--config", toy.config(), "--mock", "--log-level", "off", "pipeline"}) == 0);
  CHECK(slurp(toy.work("rewards.jsonl")) == rewards);
  CHECK(fs::exists(toy.work("cache/judge_cache.jsonl")));
}

TEST_CASE("em-eval and correlate commands") {
  ToyRun toy;
  write_text(toy.dir / "preds.jsonl",
             "{\"question_id\":\"a\",\"prediction\":\"The Beatles\",\"ground_truth\":\"beatles\"}\n"
             "{\"question_id\":\"b\",\"prediction\":\"no\",\"ground_truth\":\"yes\"}\n");
  REQUIRE(cli::run({"--config", toy.config(), "--log-level", "off", "em-eval", "--predictions",
                    (toy.dir / "preds.jsonl").string()}) == 0);
  const auto rows = jsonl::read(toy.work("em_eval.jsonl"));
  REQUIRE(rows.size() == 2);
  CHECK(rows[0]["correct"] == true);
  CHECK(rows[1]["correct"] == false);

  write_text(toy.dir / "a.jsonl", "{\"question_id\":\"q1\",\"value\":0.1}\n{\"question_id\":\"q2\",\"value\":0.5}\n"
                                  "{\"question_id\":\"q3\",\"value\":0.9}\n");
  write_text(toy.dir / "b.jsonl", "{\"question_id\":\"q3\",\"value\":1.8}\n{\"question_id\":\"q1\",\"value\":0.2}\n"
                                  "{\"question_id\":\"q2\",\"value\":1.0}\n");
  REQUIRE(cli::run({"--config", toy.config(), "--log-level", "off", "correlate", "--a", (toy.dir / "a.jsonl").string(),
                    "--b", (toy.dir / "b.jsonl").string()}) == 0);
  const auto corr = jsonl::read(toy.work("correlation.jsonl"));
  CHECK(corr.at(0)["n"] == 3);
  CHECK(corr.at(0)["pearson"].get<double>() == doctest::Approx(1.0));
}

TEST_CASE("gold-label and augment stages run in mock mode") {
  ToyRun toy;
  REQUIRE(cli::run({"--config", toy.config(), "--mock", "--log-level", "off", "pipeline", "--stages",
                    "segment,index,mine,rubrics,verify,gold-label,augment"}) == 0);
  const auto gold = jsonl::read(toy.work("gold.jsonl"));
  CHECK_FALSE(gold.empty());
  for (const auto& g : gold) g.get<GoldRecord>().validate();
  CHECK_FALSE(jsonl::read(toy.work("augmented.jsonl")).empty());
  CHECK(cli::run({"--config", toy.config(), "--mock", "--log-level", "off", "pipeline", "--stages", "bogus"}) ==
        cli::kExitConfigError);
}
