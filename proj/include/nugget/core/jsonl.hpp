#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "nugget/core/json.hpp"

namespace nugget::jsonl {

// Every persisted record carries this version; readers reject anything else.
inline constexpr int kSchemaVersion = 1;
inline constexpr const char* kSchemaKey = "schema_version";

// Stamps `schema_version` into each object and writes one compact line per
// record. Output is byte-stable for identical inputs.
std::string dump(const std::vector<Json>& records);
void write(const std::filesystem::path& path, const std::vector<Json>& records);

// Reads every non-blank line. Throws IoError when the file is missing and
// SchemaViolation on malformed lines or an unknown schema_version. Hand-made
// inputs (corpus, questions, answers) may omit the version entirely when
// `require_version` is false; a version that is present must still match.
std::vector<Json> read(const std::filesystem::path& path, bool require_version = true);
std::vector<Json> parse(const std::string& content, const std::string& origin = "<memory>",
                        bool require_version = true);

template <typename T>
std::vector<Json> to_records(const std::vector<T>& values) {
  std::vector<Json> out;
  out.reserve(values.size());
  for (const auto& v : values) out.push_back(Json(v));
  return out;
}

template <typename T>
std::vector<T> from_records(const std::vector<Json>& records) {
  std::vector<T> out;
  out.reserve(records.size());
  for (const auto& r : records) out.push_back(r.get<T>());
  return out;
}

}  // namespace nugget::jsonl
