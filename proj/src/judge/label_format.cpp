#include "nugget/judge/label_format.hpp"

#include <cctype>
#include <json.hpp>

#include "nugget/core/error.hpp"
#include "nugget/core/text.hpp"

namespace nugget::judge {

namespace {

struct FormatInfo {
  LabelFormat format;
  std::string_view id;
  std::string_view instruction;
};

constexpr std::array<FormatInfo, 10> kFormats{{
    {LabelFormat::json, "json", "Respond with a JSON array containing exactly one label for each nugget."},
    {LabelFormat::csv, "csv", "Respond with comma-separated values, one label for each nugget."},
    {LabelFormat::python_list, "python_list",
     "Respond with a Python list containing exactly one label for each nugget."},
    {LabelFormat::yaml, "yaml", "Respond with a YAML list, one label for each nugget."},
    {LabelFormat::markdown, "markdown", "Respond with a Markdown unordered list, one label for each nugget."},
    {LabelFormat::xml, "xml", "Respond with XML format, one label for each nugget."},
    {LabelFormat::tsv, "tsv", "Respond with tab-separated values, one label for each nugget."},
    {LabelFormat::numbered, "numbered", "Respond with a numbered list, one label for each nugget."},
    {LabelFormat::comma_separated, "comma_separated",
     "Respond with comma-separated values with spaces, one label for each nugget."},
    {LabelFormat::pipe_separated, "pipe_separated", "Respond with pipe-separated values, one label for each nugget."},
}};

const FormatInfo& info(LabelFormat format) {
  for (const auto& f : kFormats)
    if (f.format == format) return f;
  return kFormats.front();
}

[[noreturn]] void violation(LabelFormat format, const std::string& detail) {
  throw Error(ErrorCode::FormatViolation, std::string(to_string(format)) + " payload: " + detail);
}

SupportLabel parse_token(std::string_view raw) {
  std::string token = text::to_lower(text::trim(raw));
  if (auto label = label_from_string(token)) return *label;
  throw Error(ErrorCode::UnknownToken, "'" + std::string(text::trim(raw)) + "' is not a support label");
}

std::string_view strip_fence(std::string_view s) {
  s = text::trim(s);
  if (s.substr(0, 3) != "```") return s;
  auto first_newline = s.find('\n');
  if (first_newline == std::string_view::npos) return s;
  std::string_view body = s.substr(first_newline + 1);
  body = text::trim(body);
  if (body.size() >= 3 && body.substr(body.size() - 3) == "```") body.remove_suffix(3);
  return text::trim(body);
}

std::vector<std::string_view> non_blank_lines(std::string_view s) {
  std::vector<std::string_view> out;
  for (auto line : text::split_lines(s))
    if (!text::trim(line).empty()) out.push_back(line);
  return out;
}

std::vector<std::string_view> delimited_items(std::string_view s, char delimiter, LabelFormat format) {
  if (s.empty()) return {};
  if (s.find('\n') != std::string_view::npos) violation(format, "expected a single line");
  auto parts = text::split(s, delimiter);
  for (auto part : parts)
    if (text::trim(part).empty()) violation(format, "empty field");
  return parts;
}

std::vector<std::string_view> json_items(std::string_view s, std::vector<std::string>& storage) {
  nlohmann::json parsed;
  try {
    parsed = nlohmann::json::parse(s);
  } catch (const nlohmann::json::parse_error&) {
    violation(LabelFormat::json, "not valid JSON");
  }
  if (!parsed.is_array()) violation(LabelFormat::json, "expected an array");
  storage.reserve(parsed.size());
  for (const auto& item : parsed) {
    if (!item.is_string()) violation(LabelFormat::json, "array elements must be strings");
    storage.push_back(item.get<std::string>());
  }
  return {storage.begin(), storage.end()};
}

std::vector<std::string_view> python_items(std::string_view s) {
  if (s.size() < 2 || s.front() != '[' || s.back() != ']') violation(LabelFormat::python_list, "expected [...]");
  std::string_view inner = text::trim(s.substr(1, s.size() - 2));
  std::vector<std::string_view> out;
  if (inner.empty()) return out;
  for (auto part : text::split(inner, ',')) {
    part = text::trim(part);
    if (part.size() < 2 || (part.front() != '\'' && part.front() != '"') || part.back() != part.front())
      violation(LabelFormat::python_list, "elements must be quoted strings");
    out.push_back(part.substr(1, part.size() - 2));
  }
  return out;
}

// Lines of the form "<marker> item". YAML tolerates a bare first item when all
// later lines carry the marker, which is how the label list reads after a
// prompt that already ends in "- ".
std::vector<std::string_view> bulleted_items(std::string_view s, LabelFormat format, std::string_view markers) {
  auto lines = non_blank_lines(s);
  std::vector<std::string_view> out;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    std::string_view line = text::trim(lines[i]);
    const bool bulleted = line.size() >= 2 && markers.find(line[0]) != std::string_view::npos &&
                          std::isspace(static_cast<unsigned char>(line[1]));
    if (bulleted) {
      out.push_back(line.substr(2));
      continue;
    }
    const bool bare_first_yaml_item = format == LabelFormat::yaml && i == 0 && lines.size() > 1;
    if (!bare_first_yaml_item) violation(format, "line " + std::to_string(i + 1) + " is not a list item");
    out.push_back(line);
  }
  return out;
}

std::vector<std::string_view> numbered_items(std::string_view s) {
  auto lines = non_blank_lines(s);
  std::vector<std::string_view> out;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    std::string_view line = text::trim(lines[i]);
    std::size_t digits = 0;
    while (digits < line.size() && std::isdigit(static_cast<unsigned char>(line[digits]))) ++digits;
    if (digits == 0 || digits >= line.size() || line[digits] != '.')
      violation(LabelFormat::numbered, "line " + std::to_string(i + 1) + " lacks an 'N.' prefix");
    if (std::stoul(std::string(line.substr(0, digits))) != i + 1)
      violation(LabelFormat::numbered, "line " + std::to_string(i + 1) + " is numbered out of order");
    out.push_back(line.substr(digits + 1));
  }
  return out;
}

std::vector<std::string_view> xml_items(std::string_view s) {
  constexpr std::string_view kOpen = "<labels>", kClose = "</labels>";
  constexpr std::string_view kItemOpen = "<label>", kItemClose = "</label>";
  auto skip_ws = [&](std::size_t pos) {
    while (pos < s.size() && std::isspace(static_cast<unsigned char>(s[pos]))) ++pos;
    return pos;
  };
  std::size_t pos = skip_ws(0);
  if (s.substr(pos, kOpen.size()) != kOpen) violation(LabelFormat::xml, "missing <labels>");
  pos += kOpen.size();
  std::vector<std::string_view> out;
  while (true) {
    pos = skip_ws(pos);
    if (s.substr(pos, kClose.size()) == kClose) {
      pos = skip_ws(pos + kClose.size());
      if (pos != s.size()) violation(LabelFormat::xml, "text after </labels>");
      return out;
    }
    if (s.substr(pos, kItemOpen.size()) != kItemOpen) violation(LabelFormat::xml, "expected <label> or </labels>");
    pos += kItemOpen.size();
    std::size_t end = s.find(kItemClose, pos);
    if (end == std::string_view::npos) violation(LabelFormat::xml, "unterminated <label>");
    std::string_view content = s.substr(pos, end - pos);
    if (content.find('<') != std::string_view::npos) violation(LabelFormat::xml, "nested markup inside <label>");
    out.push_back(content);
    pos = end + kItemClose.size();
  }
}

std::vector<std::string_view> whitespace_items(std::string_view s) {
  std::vector<std::string_view> out;
  if (s.find('\n') != std::string_view::npos) violation(LabelFormat::tsv, "expected a single line");
  std::size_t pos = 0;
  while (pos < s.size()) {
    while (pos < s.size() && (s[pos] == '\t' || s[pos] == ' ')) ++pos;
    std::size_t start = pos;
    while (pos < s.size() && s[pos] != '\t' && s[pos] != ' ') ++pos;
    if (pos > start) out.push_back(s.substr(start, pos - start));
  }
  return out;
}

}  // namespace

std::string_view to_string(LabelFormat format) noexcept { return info(format).id; }

std::optional<LabelFormat> label_format_from_string(std::string_view id) noexcept {
  for (const auto& f : kFormats)
    if (f.id == id) return f.format;
  return std::nullopt;
}

std::string_view instruction_text(LabelFormat format) noexcept { return info(format).instruction; }

std::string serialize_labels(std::span<const SupportLabel> labels, LabelFormat format) {
  std::string out;
  auto join = [&](std::string_view before, std::string_view after, std::string_view separator) {
    for (std::size_t i = 0; i < labels.size(); ++i) {
      if (i > 0) out += separator;
      out += before;
      out += to_string(labels[i]);
      out += after;
    }
  };
  switch (format) {
    case LabelFormat::json:
      out += '[';
      join("\"", "\"", ", ");
      out += ']';
      break;
    case LabelFormat::csv:
      join("", "", ",");
      break;
    case LabelFormat::python_list:
      out += '[';
      join("'", "'", ", ");
      out += ']';
      break;
    case LabelFormat::yaml:
      join("- ", "", "\n");
      break;
    case LabelFormat::markdown:
      join("* ", "", "\n");
      break;
    case LabelFormat::xml:
      out += "<labels>\n";
      join("<label>", "</label>", "\n");
      out += "\n</labels>";
      break;
    case LabelFormat::tsv:
      join("", "", "\t");
      break;
    case LabelFormat::numbered:
      for (std::size_t i = 0; i < labels.size(); ++i) {
        if (i > 0) out += '\n';
        out += std::to_string(i + 1) + ". " + std::string(to_string(labels[i]));
      }
      break;
    case LabelFormat::comma_separated:
      join("", "", ", ");
      break;
    case LabelFormat::pipe_separated:
      join("", "", "|");
      break;
  }
  return out;
}

std::vector<SupportLabel> parse_labels(std::string_view payload, LabelFormat format, std::size_t expected,
                                       JudgeMode mode) {
  const std::string_view body = strip_fence(payload);
  std::vector<std::string> storage;
  std::vector<std::string_view> items;
  switch (format) {
    case LabelFormat::json:
      items = json_items(body, storage);
      break;
    case LabelFormat::csv:
    case LabelFormat::comma_separated:
      items = delimited_items(body, ',', format);
      break;
    case LabelFormat::pipe_separated:
      items = delimited_items(body, '|', format);
      break;
    case LabelFormat::python_list:
      items = python_items(body);
      break;
    case LabelFormat::yaml:
      items = bulleted_items(body, format, "-");
      break;
    case LabelFormat::markdown:
      items = bulleted_items(body, format, "*-+");
      break;
    case LabelFormat::xml:
      items = xml_items(body);
      break;
    case LabelFormat::tsv:
      items = whitespace_items(body);
      break;
    case LabelFormat::numbered:
      items = numbered_items(body);
      break;
  }

  std::vector<SupportLabel> labels;
  labels.reserve(items.size());
  for (auto item : items) labels.push_back(parse_token(item));

  if (labels.size() != expected)
    throw Error(ErrorCode::CountMismatch,
                "expected " + std::to_string(expected) + " labels, found " + std::to_string(labels.size()));
  if (mode == JudgeMode::binary)
    for (auto label : labels)
      if (label == SupportLabel::partial_support)
        throw Error(ErrorCode::BinaryViolation, "partial_support is not allowed in binary mode");
  return labels;
}

}  // namespace nugget::judge
