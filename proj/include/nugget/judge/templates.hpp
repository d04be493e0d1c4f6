#pragma once

#include <array>
#include <map>
#include <optional>
#include <string>
#include <string_view>

namespace nugget::judge {

enum class TemplateId {
  rewrite,
  dedup,
  temporal,
  nugget_creator,
  nugget_merger,
  nugget_scorer,
  verify_ternary,
  verify_binary,
};

inline constexpr std::array<TemplateId, 8> kAllTemplates{
    TemplateId::rewrite,       TemplateId::dedup,         TemplateId::temporal,
    TemplateId::nugget_creator, TemplateId::nugget_merger, TemplateId::nugget_scorer,
    TemplateId::verify_ternary, TemplateId::verify_binary};

inline constexpr std::string_view kTemplateVersion = "v1";

std::string_view to_string(TemplateId id) noexcept;
std::optional<TemplateId> template_from_string(std::string_view name) noexcept;

// Raw template text as shipped in resources/templates/<version>/<name>.txt.
std::string_view template_text(TemplateId id) noexcept;

using TemplateVars = std::map<std::string, std::string>;

// Replaces every {name} placeholder. A placeholder without a value, or a
// value that names no placeholder, throws ConfigError.
std::string render(std::string_view text, const TemplateVars& vars);
std::string render(TemplateId id, const TemplateVars& vars);

}  // namespace nugget::judge
