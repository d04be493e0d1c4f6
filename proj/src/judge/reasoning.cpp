#include "nugget/judge/reasoning.hpp"

#include "nugget/core/text.hpp"

namespace nugget::judge {

ReasoningSplit split_reasoning(std::string_view raw) {
  ReasoningSplit out;
  const auto close = raw.find(kReasoningClose);
  if (close == std::string_view::npos) {
    out.payload = std::string(text::trim(raw));
    return out;
  }
  const auto open = raw.substr(0, close).find(kReasoningOpen);
  if (open != std::string_view::npos) {
    const auto start = open + kReasoningOpen.size();
    out.reasoning = std::string(raw.substr(start, close - start));
    out.well_formed = true;
  }
  out.payload = std::string(text::trim(raw.substr(close + kReasoningClose.size())));
  return out;
}

}  // namespace nugget::judge
