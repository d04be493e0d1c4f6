#include "nugget/judge/templates.hpp"

#include <set>

#include "nugget/core/error.hpp"

namespace nugget::judge {

namespace detail {
extern const std::string_view k_rewrite_template;
extern const std::string_view k_dedup_template;
extern const std::string_view k_temporal_template;
extern const std::string_view k_nugget_creator_template;
extern const std::string_view k_nugget_merger_template;
extern const std::string_view k_nugget_scorer_template;
extern const std::string_view k_verify_ternary_template;
extern const std::string_view k_verify_binary_template;
}  // namespace detail

namespace {

constexpr std::array<std::string_view, 8> kNames{"rewrite",       "dedup",         "temporal",
                                                 "nugget_creator", "nugget_merger", "nugget_scorer",
                                                 "verify_ternary", "verify_binary"};

bool is_name_char(char c) { return (c >= 'a' && c <= 'z') || c == '_'; }

}  // namespace

std::string_view to_string(TemplateId id) noexcept { return kNames[static_cast<std::size_t>(id)]; }

std::optional<TemplateId> template_from_string(std::string_view name) noexcept {
  for (auto id : kAllTemplates)
    if (to_string(id) == name) return id;
  return std::nullopt;
}

std::string_view template_text(TemplateId id) noexcept {
  switch (id) {
    case TemplateId::rewrite:
      return detail::k_rewrite_template;
    case TemplateId::dedup:
      return detail::k_dedup_template;
    case TemplateId::temporal:
      return detail::k_temporal_template;
    case TemplateId::nugget_creator:
      return detail::k_nugget_creator_template;
    case TemplateId::nugget_merger:
      return detail::k_nugget_merger_template;
    case TemplateId::nugget_scorer:
      return detail::k_nugget_scorer_template;
    case TemplateId::verify_ternary:
      return detail::k_verify_ternary_template;
    case TemplateId::verify_binary:
      return detail::k_verify_binary_template;
  }
  return {};
}

std::string render(std::string_view text, const TemplateVars& vars) {
  std::string out;
  out.reserve(text.size() + 256);
  std::set<std::string> used;
  std::size_t pos = 0;
  while (pos < text.size()) {
    const auto open = text.find('{', pos);
    if (open == std::string_view::npos) {
      out.append(text.substr(pos));
      break;
    }
    auto end = open + 1;
    while (end < text.size() && is_name_char(text[end])) ++end;
    if (end == open + 1 || end >= text.size() || text[end] != '}') {
      // Not a placeholder; keep the brace literally.
      out.append(text.substr(pos, open + 1 - pos));
      pos = open + 1;
      continue;
    }
    const std::string name(text.substr(open + 1, end - open - 1));
    const auto it = vars.find(name);
    if (it == vars.end()) throw Error(ErrorCode::ConfigError, "template placeholder {" + name + "} has no value");
    out.append(text.substr(pos, open - pos));
    out.append(it->second);
    used.insert(name);
    pos = end + 1;
  }
  for (const auto& [name, value] : vars)
    if (!used.contains(name)) throw Error(ErrorCode::ConfigError, "template has no placeholder {" + name + "}");
  return out;
}

std::string render(TemplateId id, const TemplateVars& vars) { return render(template_text(id), vars); }

}  // namespace nugget::judge
