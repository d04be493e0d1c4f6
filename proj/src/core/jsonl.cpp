#include "nugget/core/jsonl.hpp"

#include <fstream>
#include <sstream>

#include "nugget/core/error.hpp"
#include "nugget/core/text.hpp"

namespace nugget::jsonl {

std::string dump(const std::vector<Json>& records) {
  std::string out;
  for (const auto& record : records) {
    if (!record.is_object()) throw Error(ErrorCode::SchemaViolation, "JSONL records must be objects");
    Json stamped = record;
    stamped[kSchemaKey] = kSchemaVersion;
    out += stamped.dump();
    out += '\n';
  }
  return out;
}

void write(const std::filesystem::path& path, const std::vector<Json>& records) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
  out << dump(records);
  if (!out) throw Error(ErrorCode::IoError, "write failed for " + path.string());
}

std::vector<Json> parse(const std::string& content, const std::string& origin, bool require_version) {
  std::vector<Json> records;
  std::size_t line_no = 0;
  for (std::string_view line : text::split_lines(content)) {
    ++line_no;
    if (text::trim(line).empty()) continue;
    Json record;
    try {
      record = Json::parse(line);
    } catch (const Json::parse_error& e) {
      throw Error(ErrorCode::SchemaViolation, origin + ":" + std::to_string(line_no) + ": " + e.what());
    }
    if (!record.is_object())
      throw Error(ErrorCode::SchemaViolation, origin + ":" + std::to_string(line_no) + ": record is not an object");
    auto version = record.find(kSchemaKey);
    if (version == record.end() && !require_version) {
      records.push_back(std::move(record));
      continue;
    }
    if (version == record.end() || !version->is_number_integer() || version->get<int>() != kSchemaVersion)
      throw Error(ErrorCode::SchemaViolation,
                  origin + ":" + std::to_string(line_no) + ": unsupported or missing schema_version");
    record.erase(kSchemaKey);
    records.push_back(std::move(record));
  }
  return records;
}

std::vector<Json> read(const std::filesystem::path& path, bool require_version) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse(buffer.str(), path.string(), require_version);
}

}  // namespace nugget::jsonl
