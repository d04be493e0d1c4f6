#pragma once

#include <string>
#include <string_view>

namespace nugget::judge {

inline constexpr std::string_view kReasoningOpen = "<reasoning>";
inline constexpr std::string_view kReasoningClose = "</reasoning>";

struct ReasoningSplit {
  std::string reasoning;
  std::string payload;
  // An opening tag precedes the first closing tag.
  bool well_formed = false;
};

// reasoning: content of the first <reasoning>...</reasoning> span (empty when
// absent). payload: trimmed text after the first closing tag, or the whole
// trimmed input when no closing tag exists.
ReasoningSplit split_reasoning(std::string_view raw);

}  // namespace nugget::judge
