#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

#include "nugget/core/json.hpp"
#include "nugget/judge/judge.hpp"
#include "nugget/mining/miner.hpp"
#include "nugget/rubrics/builder.hpp"
#include "nugget/trainkit/augment.hpp"
#include "nugget/trainkit/reward.hpp"
#include "nugget/verify/verify.hpp"

namespace nugget::cli {

struct EmbedderConfig {
  // "hash" (offline) or "http".
  std::string kind = "hash";
  std::size_t dimension = 512;
  net::HttpEndpoint endpoint;
  std::size_t batch_size = 64;
};

// Every knob of a run in one declarative file. Relative paths are resolved
// against the directory of the config file. Secrets stay in environment
// variables named here.
struct RunConfig {
  std::uint64_t seed = 0;
  std::filesystem::path work_dir = "run";

  judge::JudgeConfig judge;
  // Teacher for gold labelling; defaults to the judge.
  judge::JudgeConfig teacher;
  // Scripted replies used with --mock.
  std::optional<std::filesystem::path> mock_rules;

  EmbedderConfig embedder;
  std::size_t min_sentences = 5;
  std::size_t max_sentences = 10;
  std::size_t k_max = 20;
  // Used when no qrels are supplied for calibration.
  std::optional<double> threshold;

  mining::MiningBudget budget;
  std::size_t max_new_queries = 3;

  rubrics::BuildOptions rubric_options;

  JudgeMode mode = JudgeMode::ternary;
  judge::LabelFormat format = judge::LabelFormat::json;
  verify::VerifyOptions verify_options;

  std::size_t votes = 1;
  double sample_fraction = 0.10;
  trainkit::AugmentOptions augment_options;
  trainkit::FeedOptions feed_options;

  // Pipeline inputs.
  std::optional<std::filesystem::path> corpus;
  std::optional<std::filesystem::path> questions;
  std::optional<std::filesystem::path> answers;
  std::optional<std::filesystem::path> qrels;
  std::optional<std::filesystem::path> rollouts;

  // Canonical JSON of everything above, and its hash.
  Json canonical;
  std::string hash;

  // Throws ConfigError for invalid values.
  void validate() const;
};

// Parses a config document; `base_dir` anchors relative paths.
RunConfig config_from_json(const Json& doc, const std::filesystem::path& base_dir);

// Missing file, bad JSON or invalid values -> ConfigError naming the path.
RunConfig load_config(const std::filesystem::path& path);

}  // namespace nugget::cli
